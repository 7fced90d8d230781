"""Exact-2-design variances, the correction term, and bound assembly."""
import math

import numpy as np
import pytest

from qlandscape.ansatz import AnsatzSpec
from qlandscape.bounds import (
    f_correction,
    pauli_string_variance_rl,
    theorem_bounds,
    two_design_variance_l,
    two_design_variance_r,
    two_design_variance_rl,
    TwoDesignVariance,
)
from qlandscape.dense import haar_unitaries
from qlandscape.expressibility import AnsatzSampler, FixedSampler, HaarSampler
from qlandscape.paulis import Observable, PauliTerm, global_z, local_z
from qlandscape.rng import stream
from qlandscape.states import InitialStateSpec


def test_rl_closed_form_values():
    # Pauli generator, traceless Pauli-string H with Tr[H^2] = d, pure rho
    assert two_design_variance_rl(1, 0.0, 2.0, 0.0, 2.0, 1.0) == pytest.approx(8.0 / 9.0)
    assert two_design_variance_rl(2, 0.0, 4.0, 0.0, 4.0, 1.0) == pytest.approx(32.0 / 75.0)
    for n in range(1, 8):
        d = 2.0 ** n
        assert pauli_string_variance_rl(n) == pytest.approx(
            two_design_variance_rl(n, 0.0, d, 0.0, d, 1.0)
        )


def test_rl_vanishes_for_maximally_mixed_input():
    assert two_design_variance_rl(2, 0.0, 4.0, 0.0, 4.0, 1.0 / 4.0) == pytest.approx(0.0)


def test_rl_exponential_scaling():
    # value(n+1)/value(n) approaches 1/2; within [0.4, 0.6] for n >= 4
    for n in range(4, 10):
        ratio = pauli_string_variance_rl(n + 1) / pauli_string_variance_rl(n)
        assert 0.4 <= ratio <= 0.6


def test_var_r_zero_for_commuting_pair():
    # left ensemble {I} with H and V both sigma_z: the commutator vanishes
    obs = global_z(1)
    rho = InitialStateSpec("tilted-product", 1)
    fixed = FixedSampler(np.eye(2, dtype=complex)[None])
    var_r = two_design_variance_r(obs, rho, fixed, 50, 0, generator_axis="z")
    assert var_r.value == pytest.approx(0.0, abs=1e-12)


def test_var_l_zero_for_commuting_pair():
    obs = global_z(1)
    rho = InitialStateSpec("all-zero", 1)
    fixed = FixedSampler(np.eye(2, dtype=complex)[None])
    var_l = two_design_variance_l(obs, rho, fixed, 50, 0, generator_axis="z")
    assert var_l.value == pytest.approx(0.0, abs=1e-12)


def test_var_l_prefactor_vanishes_for_identity_cost():
    obs = Observable(1, (PauliTerm(1.0, ()),))  # H = I
    rho = InitialStateSpec("tilted-product", 1)
    var_l = two_design_variance_l(obs, rho, HaarSampler(1), 200, 1, generator_axis="y")
    assert var_l.value == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2])
def test_haar_coincidence_of_r_l_and_rl(n):
    # with Haar complementary ensembles all three variants agree
    obs = global_z(n)
    rho = InitialStateSpec("tilted-product", n)
    expected = pauli_string_variance_rl(n)
    var_r = two_design_variance_r(obs, rho, HaarSampler(n), 4000, (2, n), generator_axis="y")
    var_l = two_design_variance_l(obs, rho, HaarSampler(n), 4000, (3, n), generator_axis="y")
    assert abs(var_r.value - expected) <= 3 * var_r.value_stderr
    assert abs(var_l.value - expected) <= 3 * var_l.value_stderr


def test_var_r_inner_integrand_range():
    # every sample of Tr([V, U^dag H U]^2) lies in [-8 Tr H^2, 0]
    obs = local_z(3)
    rho = InitialStateSpec("tilted-product", 3)
    spec = AnsatzSpec(3, 4)
    sampler = AnsatzSampler(spec, "left", (0, 0))
    var_r = two_design_variance_r(obs, rho, spec and sampler, 400, 4)
    tr_h2 = obs.trace_square()
    assert var_r.inner_value <= 0.0
    assert var_r.inner_value >= -8.0 * tr_h2
    assert var_r.value >= 0.0


def test_var_l_with_segment_sampler():
    spec = AnsatzSpec(2, 3)
    sampler = AnsatzSampler(spec, "right", (1, 1))
    obs = local_z(2)
    rho = InitialStateSpec("tilted-product", 2)
    var_l = two_design_variance_l(obs, rho, sampler, 500, 5)
    assert var_l.value >= 0.0
    assert var_l.inner_stderr >= 0.0


def test_f_correction_values():
    assert f_correction(0, 0, 2, 0, 0, 0, 0) == 0.0
    assert f_correction(0.0, 0.0, 3, 5.0, 1.0, 0.3, 0.2) == pytest.approx(4 * 0.3 * 0.2)
    # n = 1, x = 1, y = 0, ||H||_2^2 = 2, eps = 0: 2^3 * 2 / 3 = 16/3
    assert f_correction(1.0, 0.0, 1, 2.0, 1.0, 0.0, 0.0) == pytest.approx(16.0 / 3.0)
    with pytest.raises(ValueError):
        f_correction(-1.0, 0.0, 1, 1.0, 1.0, 0.0, 0.0)


def test_theorem_bounds_reduce_to_two_design_values_at_zero_eps():
    var_r = TwoDesignVariance("R", 0.4, 0.01)
    var_l = TwoDesignVariance("L", 0.5, 0.01)
    report = theorem_bounds(
        n_qubits=2,
        measured_variance=0.3,
        measured_stderr=0.02,
        eps_r_rho=0.0,
        eps_r_rho_stderr=0.0,
        eps_l_h=0.0,
        eps_l_h_stderr=0.0,
        var_r=var_r,
        var_l=var_l,
        var_rl=0.45,
        h2norm_sq=4.0,
        rho2norm_sq=1.0,
    )
    assert report.bound_r == pytest.approx(0.4)
    assert report.bound_l == pytest.approx(0.5)
    assert report.bound_rl == pytest.approx(0.45)
    assert report.slack_r == pytest.approx(0.1)
    assert report.all_hold()


def test_theorem_bounds_argument_order():
    # the RL correction is f(eps_L^H, eps_R^rho): x multiplies ||H||_2^2
    eps_l, eps_r = 0.25, 0.125
    h2, rho2 = 4.0, 1.0
    n = 2
    report = theorem_bounds(
        n_qubits=n,
        measured_variance=0.0,
        measured_stderr=0.0,
        eps_r_rho=eps_r,
        eps_r_rho_stderr=0.0,
        eps_l_h=eps_l,
        eps_l_h_stderr=0.0,
        var_r=TwoDesignVariance("R", 0.0),
        var_l=TwoDesignVariance("L", 0.0),
        var_rl=0.0,
        h2norm_sq=h2,
        rho2norm_sq=rho2,
    )
    expected = f_correction(eps_l, eps_r, n, h2, rho2, eps_r, eps_l)
    assert report.bound_rl == pytest.approx(expected)
    assert expected == pytest.approx(4 * eps_r * eps_l + 16 * (eps_l * h2 + eps_r * rho2) / 15.0)


def test_bound_report_holds_tolerances():
    report = theorem_bounds(
        n_qubits=2,
        measured_variance=0.50,
        measured_stderr=0.02,
        eps_r_rho=0.0,
        eps_r_rho_stderr=0.0,
        eps_l_h=0.0,
        eps_l_h_stderr=0.0,
        var_r=TwoDesignVariance("R", 0.47, 0.01),
        var_l=TwoDesignVariance("L", 0.2, 0.0),
        var_rl=0.45,
        h2norm_sq=4.0,
        rho2norm_sq=1.0,
    )
    # slack_r = -0.03 within 3*hypot(0.02, 0.01) ~ 0.067 -> holds
    assert report.holds("r")
    # slack_l = -0.3 far beyond noise -> violated
    assert not report.holds("l")
    assert not report.all_hold()
