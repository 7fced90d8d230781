"""Frame potentials, the twirl oracle, and the Haar identity suite."""
import math

import numpy as np
import pytest

from qlandscape.ansatz import AnsatzSpec
from qlandscape.dense import ResourceGuardError, haar_unitaries, swap_operator
from qlandscape.expressibility import (
    AnsatzSampler,
    FixedSampler,
    HaarSampler,
    dense_epsilon_oracle,
    dense_haar_twirl,
    expressibility_report,
    frame_potential,
    haar_frame_potential,
    verify_haar_identities,
)
from qlandscape.paulis import global_z, local_z
from qlandscape.rng import stream
from qlandscape.states import InitialStateSpec, StateVector


def test_haar_frame_potential_closed_forms():
    # fiducial state: 1/((2^n + 1) 2^(n-1))
    for n in [1, 2, 3]:
        expected = 1.0 / ((2 ** n + 1) * 2 ** (n - 1))
        assert haar_frame_potential(StateVector.zero(n)) == pytest.approx(expected)
    # sigma_z at n = 1: (0 + 4)/3 = 4/3
    assert haar_frame_potential(global_z(1)) == pytest.approx(4.0 / 3.0)
    # traceless Pauli strings at any n: Tr[X^2]^2/(d^2-1) = d^2/(d^2-1)
    for n in [2, 3]:
        d = 2 ** n
        assert haar_frame_potential(global_z(n)) == pytest.approx(d * d / (d * d - 1.0))
        assert haar_frame_potential(local_z(n)) == pytest.approx(d * d / (d * d - 1.0))


def test_haar_frame_potential_identity_operand():
    # X = I on one qubit: the pair term is Tr[I]^2 = 4 for every (U, V),
    # so the frame potential is exactly 4; the closed form must agree.
    value = haar_frame_potential(np.eye(2, dtype=complex))
    assert value == pytest.approx(4.0)
    est = frame_potential(np.eye(2, dtype=complex), HaarSampler(1), 200, 0)
    assert est.value == pytest.approx(4.0, abs=1e-10)


def test_monte_carlo_matches_closed_form_state():
    for n, seed in [(1, 10), (2, 11)]:
        est = frame_potential(StateVector.zero(n), HaarSampler(n), 40_000, seed)
        expected = haar_frame_potential(StateVector.zero(n))
        assert abs(est.value - expected) <= 3 * est.stderr


def test_monte_carlo_matches_closed_form_operator():
    est = frame_potential(global_z(1), HaarSampler(1), 40_000, 12)
    assert abs(est.value - 4.0 / 3.0) <= 3 * est.stderr


def test_single_element_ensemble():
    fixed = FixedSampler(np.eye(2, dtype=complex)[None])
    est = frame_potential(StateVector.zero(1), fixed, 100, 1)
    assert est.value == pytest.approx(1.0, abs=1e-12)
    report = expressibility_report(StateVector.zero(1), fixed, 100, 1)
    assert report.epsilon == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-12)
    assert not report.clamped_flag
    assert report.ratio == pytest.approx(3.0, abs=1e-9)


def test_haar_ensemble_epsilon_clamps_to_zero():
    report = expressibility_report(StateVector.zero(1), HaarSampler(1), 5000, 42)
    assert report.epsilon <= 0.05
    assert report.ratio == pytest.approx(1.0, abs=0.05)


def test_frame_potential_lower_bound_property():
    # F_Haar is the global minimum over ensembles, up to sampling noise
    spec = AnsatzSpec(2, 2)
    samplers = [
        HaarSampler(2),
        AnsatzSampler(spec, "full"),
        AnsatzSampler(spec, "right", (0, 1)),
        FixedSampler(haar_unitaries(4, 8, stream(13, "fix"))),
    ]
    x = InitialStateSpec("tilted-product", 2)
    haar_value = haar_frame_potential(x)
    for i, sampler in enumerate(samplers):
        est = frame_potential(x, sampler, 4000, (14, i))
        assert est.value >= haar_value - 3 * est.stderr


def test_non_hermitian_operand_rejected():
    with pytest.raises(ValueError):
        frame_potential(np.array([[0.0, 1.0], [0.0, 0.0]]), HaarSampler(1), 10, 0)


def test_dense_haar_twirl_examples():
    # rho x rho for pure rho: (I + W)/6, the normalized symmetric projector
    rho = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    twirl = dense_haar_twirl(np.kron(rho, rho))
    w = swap_operator(2).entries
    np.testing.assert_allclose(twirl.entries, (np.eye(4) + w) / 6.0, atol=1e-14)
    # the identity is a fixed point
    twirl_i = dense_haar_twirl(np.eye(4, dtype=complex))
    np.testing.assert_allclose(twirl_i.entries, np.eye(4), atol=1e-14)


def test_dense_haar_twirl_against_sampling_oracle():
    rng = stream(15, "ops")
    x2 = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    us = haar_unitaries(2, 10_000, stream(15, "mc"))
    u2 = np.einsum("kab,kcd->kacbd", us, us).reshape(-1, 4, 4)
    terms = np.einsum("kab,bc,kdc->kad", u2, x2, u2.conj())
    mc = terms.mean(axis=0)
    stderr = np.sqrt((terms.real.var(axis=0) + terms.imag.var(axis=0)) / terms.shape[0])
    expected = dense_haar_twirl(x2).entries
    assert np.all(np.abs(mc - expected) <= 3 * stderr + 1e-12)


def test_dense_epsilon_oracle_single_element():
    fixed = FixedSampler(np.eye(2, dtype=complex)[None])
    value = dense_epsilon_oracle(StateVector.zero(1), fixed, 64, 5)
    assert value == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-12)


def test_dense_epsilon_oracle_haar_vanishes():
    value = dense_epsilon_oracle(StateVector.zero(1), HaarSampler(1), 8000, 6)
    assert value <= 0.03


def test_route_equivalence_small_ensembles():
    # |oracle^2 - (F - F_Haar)| within combined Monte-Carlo error, n <= 2
    x = InitialStateSpec("tilted-product", 2)
    haar_value = haar_frame_potential(x)
    members = 64
    for i, depth in enumerate([1, 2, 4, 8, 16]):
        spec = AnsatzSpec(2, depth)
        sampler = AnsatzSampler(spec, "full")
        stored = sampler.draw_denses([stream(16, i, k) for k in range(members)])
        fixed = FixedSampler(stored)
        oracle = dense_epsilon_oracle(x, fixed, 20_000, (17, i))
        est = frame_potential(x, fixed, 60_000, (18, i))
        combined = 3 * est.stderr + 0.01
        assert abs(oracle ** 2 - (est.value - haar_value)) <= combined


def test_ratio_decreases_with_depth():
    # deep circuits are closer to 2-designs: the frame-potential ratio for
    # X = H_L is non-increasing across depths up to 2 stderr per step
    obs = local_z(4)
    values = []
    for i, depth in enumerate([2, 10, 50]):
        spec = AnsatzSpec(4, depth)
        rep = expressibility_report(obs, AnsatzSampler(spec, "full"), 3000, (19, i))
        values.append(rep)
    for shallow, deep in zip(values, values[1:]):
        tol = 2 * (shallow.frame_potential.stderr + deep.frame_potential.stderr)
        assert deep.ratio <= shallow.ratio + tol / shallow.haar_value


def test_epsilon_oracle_cap_guard():
    with pytest.raises(ResourceGuardError):
        dense_epsilon_oracle(StateVector.zero(4), HaarSampler(4), 10, 0)


def test_identity_suite_ginibre_statistical():
    # closed forms within 5 stderr for random complex Gaussian operators
    for d in (2, 4):
        for check in verify_haar_identities(d, 20_000, (20, d)):
            assert check.z_score <= 5.0, (d, check.name, check.z_score)


def test_identity_suite_positive_relative():
    # positive Gaussian-derived operators keep relative errors meaningful
    # (the acceptance suite tightens this to 1% at 1e5 samples)
    for d in (2, 4):
        for check in verify_haar_identities(d, 20_000, (21, d), operator_kind="positive"):
            assert check.z_score <= 5.0
            assert check.rel_error <= 0.05, (d, check.name, check.rel_error)


def test_identity_closed_form_reductions():
    # algebraic reductions of the closed forms at special operator choices
    from qlandscape.expressibility import (
        haar_moment_identity1,
        haar_moment_identity2,
        haar_moment_identity3,
    )

    d = 2
    eye = np.eye(d, dtype=complex)
    rng = stream(22, "ops")
    b = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    e = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    # identity1 with A = B = I: Tr[A]Tr[B]/d = d
    assert haar_moment_identity1(eye, eye, d) == pytest.approx(d)
    # identity2 with A = C = I collapses to Tr[BE] (the integrand is constant)
    assert haar_moment_identity2(eye, b, eye, e, d) == pytest.approx(
        complex(np.trace(b @ e)), abs=1e-12
    )
    # identity3 with A = C = I collapses to Tr[B]Tr[E]
    assert haar_moment_identity3(eye, b, eye, e, d) == pytest.approx(
        complex(np.trace(b) * np.trace(e)), abs=1e-12
    )


def test_identity_report_shape():
    checks = verify_haar_identities(2, 100, (23, 0))
    assert {c.name for c in checks} == {"identity1", "identity2", "identity3", "two-copy-integral"}
    for check in checks:
        assert check.n_samples == 100 and check.stderr > 0
