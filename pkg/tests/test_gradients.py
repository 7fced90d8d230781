"""Gradient tests: closed-form values, three-way method agreement, the
batched engine versus the per-sample reference, and ensemble statistics."""
import numpy as np
import pytest

from qlandscape.ansatz import (
    AngleDistribution,
    AnsatzSpec,
    AxisPolicy,
    CorrelationScheme,
    sample_assignment,
)
from qlandscape.gradients import (
    CostSpec,
    VarianceReport,
    chebyshev_tail,
    cost,
    draw_gradient_samples,
    estimate_gradient_statistics,
    partial_derivative,
)
from qlandscape.paulis import Observable, PauliTerm, global_z, local_z
from qlandscape.rng import stream
from qlandscape.states import InitialStateSpec

TILTED = lambda n: InitialStateSpec("tilted-product", n)


def test_cost_all_zero_state_zero_angles():
    spec = AnsatzSpec(4, 3, angles=AngleDistribution(range_fraction=1e-9))
    assignment = sample_assignment(spec, stream(0, 0))
    assignment.free_values[:] = 0.0
    cs = CostSpec.single(InitialStateSpec("all-zero", 4), global_z(4))
    assert cost(cs, spec, assignment) == pytest.approx(1.0, abs=1e-12)


def test_cost_single_qubit_closed_form():
    spec = AnsatzSpec(1, 1, axis_policy=AxisPolicy(("y",)))
    assignment = sample_assignment(spec, stream(1, 0))
    assignment.free_values[:] = np.pi / 8
    cs = CostSpec.single(InitialStateSpec("all-zero", 1), global_z(1))
    assert cost(cs, spec, assignment) == pytest.approx(np.cos(np.pi / 4), abs=1e-12)


def test_two_identical_terms_double_the_cost():
    spec = AnsatzSpec(2, 2)
    assignment = sample_assignment(spec, stream(2, 0))
    single = CostSpec.single(TILTED(2), local_z(2))
    double = CostSpec(((TILTED(2), local_z(2)), (TILTED(2), local_z(2))))
    assert cost(double, spec, assignment) == pytest.approx(2 * cost(single, spec, assignment), abs=1e-12)


def test_derivative_single_qubit_closed_form():
    # d/dtheta cos(2 theta) = -2 sin(2 theta); at pi/8 this is -sqrt(2)
    spec = AnsatzSpec(1, 1, axis_policy=AxisPolicy(("y",)))
    assignment = sample_assignment(spec, stream(3, 0))
    assignment.free_values[:] = np.pi / 8
    cs = CostSpec.single(InitialStateSpec("all-zero", 1), global_z(1))
    for method in ("commutator", "parameter-shift"):
        assert partial_derivative(cs, spec, assignment, (0, 0), method) == pytest.approx(
            -np.sqrt(2.0), abs=1e-12
        )
    assert partial_derivative(cs, spec, assignment, (0, 0), "finite-difference") == pytest.approx(
        -np.sqrt(2.0), abs=1e-7
    )


def test_z_axis_direction_is_flat():
    # z-generator with a z-diagonal cost and z-basis input: flat landscape
    spec = AnsatzSpec(3, 3, axis_policy=AxisPolicy(("z",)))
    assignment = sample_assignment(spec, stream(4, 0))
    cs = CostSpec.single(InitialStateSpec("all-zero", 3), global_z(3))
    for target in [(0, 0), (1, 2), (2, 1)]:
        assert partial_derivative(cs, spec, assignment, target) == pytest.approx(0.0, abs=1e-12)


def test_three_way_method_agreement():
    # 50 random instances across all schemes: commutator vs shift 1e-10,
    # either vs central finite differences (h = 1e-4) 1e-6
    rng = stream(5, "threeway")
    for trial in range(50):
        n = int(rng.integers(1, 5))
        depth = int(rng.integers(1, 7))
        scheme = list(CorrelationScheme)[rng.integers(4)]
        axes = [("x",), ("y",), ("x", "y", "z")][rng.integers(3)]
        spec = AnsatzSpec(n, depth, scheme=scheme, axis_policy=AxisPolicy(axes))
        assignment = sample_assignment(spec, rng)
        cs = CostSpec.single(TILTED(n), global_z(n) if trial % 2 else local_z(n))
        target = (int(rng.integers(depth)), int(rng.integers(n)))
        g_comm = partial_derivative(cs, spec, assignment, target, "commutator")
        g_shift = partial_derivative(cs, spec, assignment, target, "parameter-shift")
        g_fd = partial_derivative(cs, spec, assignment, target, "finite-difference")
        assert abs(g_comm - g_shift) <= 1e-10
        assert abs(g_comm - g_fd) <= 1e-6


def test_chain_rule_sums_group_slots():
    spec = AnsatzSpec(2, 3, scheme=CorrelationScheme.ALL)
    assignment = sample_assignment(spec, stream(6, 0))
    cs = CostSpec.single(TILTED(2), local_z(2))
    total = sum(
        partial_derivative(cs, spec, assignment, slot)
        for slot in spec.slots_of_group(0)
    )
    chained = partial_derivative(cs, spec, assignment, (0, 0), chain_rule=True)
    assert chained == pytest.approx(total, abs=1e-12)
    # chain-rule finite differences move the whole group together
    fd = partial_derivative(cs, spec, assignment, (0, 0), "finite-difference", chain_rule=True)
    assert fd == pytest.approx(total, abs=1e-5)


def test_chain_equals_gate_for_independent_scheme():
    spec = AnsatzSpec(3, 2)
    assignment = sample_assignment(spec, stream(7, 0))
    cs = CostSpec.single(TILTED(3), global_z(3))
    a = partial_derivative(cs, spec, assignment, (1, 1))
    b = partial_derivative(cs, spec, assignment, (1, 1), chain_rule=True)
    assert a == pytest.approx(b, abs=1e-14)


def test_batched_engine_matches_reference_loop():
    for scheme in (CorrelationScheme.INDEPENDENT, CorrelationScheme.QUBITS):
        spec = AnsatzSpec(3, 4, scheme=scheme)
        cs = CostSpec.single(TILTED(3), local_z(3))
        batched = draw_gradient_samples(cs, spec, (2, 1), 12, 99)
        loop = np.array(
            [
                partial_derivative(cs, spec, sample_assignment(spec, stream(99, i)), (2, 1))
                for i in range(12)
            ]
        )
        np.testing.assert_allclose(batched, loop, atol=1e-12)


def test_batched_chain_matches_reference_loop():
    spec = AnsatzSpec(2, 4, scheme=CorrelationScheme.LAYERS)
    cs = CostSpec.single(TILTED(2), global_z(2))
    batched = draw_gradient_samples(cs, spec, (1, 0), 10, 23, chain_rule=True)
    loop = np.array(
        [
            partial_derivative(
                cs, spec, sample_assignment(spec, stream(23, i)), (1, 0), chain_rule=True
            )
            for i in range(10)
        ]
    )
    np.testing.assert_allclose(batched, loop, atol=1e-12)


def test_multi_term_gradient_linearity():
    spec = AnsatzSpec(3, 3)
    assignment = sample_assignment(spec, stream(8, 0))
    obs_a, obs_b = global_z(3), local_z(3)
    g_a = partial_derivative(CostSpec.single(TILTED(3), obs_a), spec, assignment, (1, 0))
    g_b = partial_derivative(CostSpec.single(TILTED(3), obs_b), spec, assignment, (1, 0))
    g_sum = partial_derivative(
        CostSpec(((TILTED(3), obs_a), (TILTED(3), obs_b))), spec, assignment, (1, 0)
    )
    assert g_sum == pytest.approx(g_a + g_b, abs=1e-12)


def test_statistics_determinism_across_thread_counts():
    import os

    spec = AnsatzSpec(2, 3)
    cs = CostSpec.single(TILTED(2), local_z(2))
    r1 = estimate_gradient_statistics(cs, spec, (0, 0), 100, 7)
    old = os.environ.get("QLANDSCAPE_THREADS")
    os.environ["QLANDSCAPE_THREADS"] = "8"
    try:
        r2 = estimate_gradient_statistics(cs, spec, (0, 0), 100, 7)
    finally:
        if old is None:
            os.environ.pop("QLANDSCAPE_THREADS")
        else:
            os.environ["QLANDSCAPE_THREADS"] = old
    assert r1.mean == r2.mean and r1.variance == r2.variance
    assert r1.sum_x == r2.sum_x and r1.sum_x2 == r2.sum_x2


def test_variance_report_accumulator_identity():
    samples = stream(9, "acc").standard_normal(500)
    report = VarianceReport.from_samples(samples)
    n = samples.size
    expected = (report.sum_x2 - report.sum_x ** 2 / n) / (n - 1)
    assert report.variance == expected
    assert report.variance >= 0.0
    assert report.mean_stderr == pytest.approx(np.sqrt(report.variance / n))
    # jackknife error of the variance should track the normal-theory value
    assert report.variance_stderr == pytest.approx(
        report.variance * np.sqrt(2.0 / n), rel=0.4
    )


def test_degenerate_spec_has_exactly_zero_variance():
    spec = AnsatzSpec(3, 4, axis_policy=AxisPolicy(("z",)))
    cs = CostSpec.single(InitialStateSpec("all-zero", 3), global_z(3))
    report = estimate_gradient_statistics(cs, spec, (1, 1), 50, 11)
    assert report.variance == 0.0


def test_unbiasedness_quick():
    spec = AnsatzSpec(3, 6)
    cs = CostSpec.single(TILTED(3), local_z(3))
    report = estimate_gradient_statistics(cs, spec, (0, 0), 600, 13)
    assert abs(report.mean) <= 4 * report.mean_stderr


def test_chebyshev_tail_values_and_errors():
    assert chebyshev_tail(0.1, 1.0) == pytest.approx(0.1)
    assert chebyshev_tail(0.0, 0.5) == 0.0
    with pytest.raises(ValueError):
        chebyshev_tail(0.1, 0.0)
    with pytest.raises(ValueError):
        chebyshev_tail(-0.1, 1.0)


def test_chebyshev_bound_against_counting_oracle():
    # direct counting on the sample set: tail frequency below Var/delta^2
    # plus binomial noise
    spec = AnsatzSpec(3, 5)
    cs = CostSpec.single(TILTED(3), local_z(3))
    samples = draw_gradient_samples(cs, spec, (0, 0), 1000, 17)
    report = VarianceReport.from_samples(samples)
    sigma = np.sqrt(report.variance)
    for mult in (0.5, 1.0, 2.0):
        delta = mult * sigma
        freq = float(np.mean(np.abs(samples) >= delta))
        bound = chebyshev_tail(report.variance, delta)
        binom = np.sqrt(max(freq * (1 - freq), 1e-12) / samples.size)
        assert freq <= bound + 3 * binom


def test_cost_spec_validation():
    with pytest.raises(ValueError):
        CostSpec(())
    with pytest.raises(ValueError):
        CostSpec(((TILTED(2), global_z(3)),))
    with pytest.raises(ValueError):
        partial_derivative(
            CostSpec.single(TILTED(2), global_z(2)),
            AnsatzSpec(2, 2),
            sample_assignment(AnsatzSpec(2, 2), stream(14, 0)),
            (0, 0),
            "newton",
        )
