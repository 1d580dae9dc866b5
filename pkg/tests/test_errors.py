import math

import numpy as np
import pytest

from qrms.counterexample import OBSERVABLE_A, PSI0, sharp_profile, unsharp_profile
from qrms.errors import (
    bhl_instance,
    check_requirements,
    classical_rms_commuting,
    dilation_noise_norm,
    eps_bar,
    eps_no,
    eps_no_squared,
    eps_profile_at,
    error_profile,
    profile,
    profile_period,
    random_instance,
)
from qrms.linalg import SIGMA_X, SIGMA_Z, random_hermitian, random_state
from qrms.povm import is_accurate, moment, pi1_sharp, pi2_unsharp, second_moment, sharp_from_observable


def direct_eps_sq(a, p, psi):
    # plain expectation-value form, used as an independent oracle
    m = moment(p)
    d = a - m
    return float(np.vdot(psi, (d @ d + second_moment(p) - m @ m) @ psi).real)


def expm_herm(h, t):
    w, v = np.linalg.eigh(h)
    return v @ np.diag(np.exp(1j * t * w)) @ v.conj().T


def test_eps_no_against_direct_formula():
    rng = np.random.default_rng(0)
    for _ in range(500):
        a, p, psi = random_instance(int(rng.integers(2, 5)), rng)
        assert eps_no_squared(a, p, psi) == pytest.approx(direct_eps_sq(a, p, psi), abs=1e-10)


def test_sharp_accurate_gives_zero():
    rng = np.random.default_rng(1)
    for _ in range(100):
        a = random_hermitian(3, rng)
        assert eps_no(a, sharp_from_observable(a), random_state(3, rng)) < 1e-12


def test_counterexample_profiles_closed_form():
    alphas = np.linspace(-4 * math.pi, 4 * math.pi, 257)
    np.testing.assert_allclose(profile(OBSERVABLE_A, pi1_sharp(), PSI0, alphas), sharp_profile(alphas), atol=1e-12)
    np.testing.assert_allclose(profile(OBSERVABLE_A, pi2_unsharp(), PSI0, alphas), unsharp_profile(alphas), atol=1e-12)


def test_profile_matches_pointwise_with_matrix_exponential():
    rng = np.random.default_rng(5)
    a, p, psi = random_instance(3, rng)
    g = a - np.trace(a).real / 3 * np.eye(3)
    for alpha in (0.0, 0.7, 3.0, -5.5):
        rotated = expm_herm(g, alpha / 2) @ psi
        ref = math.sqrt(max(direct_eps_sq(a, p, rotated), 0))
        assert eps_profile_at(a, p, psi, alpha) == pytest.approx(ref, abs=1e-10)
        assert profile(a, p, psi, [alpha])[0] == pytest.approx(ref, abs=1e-10)


def test_profile_period():
    assert profile_period(SIGMA_X)[0] == pytest.approx(2 * math.pi)
    assert profile_period(OBSERVABLE_A) == (pytest.approx(2 * math.pi), True)
    # levels 0, 1, 3 -> gaps 1, 2, 3 (x2 by the half angle)
    period, periodic = profile_period(np.diag([0.0, 1.0, 3.0]))
    assert periodic and period == pytest.approx(4 * math.pi)
    period, periodic = profile_period(np.diag([0.0, 1.0, math.sqrt(2)]))
    assert not periodic and period == pytest.approx(64 * math.pi)
    assert profile_period(np.eye(2) * 3.0) == (pytest.approx(2 * math.pi), True)


def test_eps_bar_of_examples():
    bar, arg = eps_bar(OBSERVABLE_A, pi1_sharp(), PSI0)
    assert bar == pytest.approx(2.0, abs=1e-9) and arg == pytest.approx(math.pi, abs=1e-7)
    bar, arg = eps_bar(OBSERVABLE_A, pi2_unsharp(), PSI0)
    assert bar == pytest.approx(math.sqrt(6), abs=1e-9) and arg == pytest.approx(math.pi, abs=1e-7)


def test_error_profile_refinement_never_below_grid():
    rng = np.random.default_rng(8)
    for _ in range(30):
        a, p, psi = random_instance(2, rng)
        prof = error_profile(a, p, psi)
        assert prof.eps_bar >= float(np.max(prof.epsilon))
        assert prof.eps_bar >= eps_no(a, p, psi) - 1e-12
        assert 0.0 <= prof.argmax_alpha < prof.period


def test_dilation_and_classical_oracles():
    rng = np.random.default_rng(3)
    for _ in range(100):
        a, p, psi = random_instance(3, rng)
        assert dilation_noise_norm(a, p, psi) == pytest.approx(eps_no(a, p, psi), abs=1e-9)
    a = np.diag([1.0, -1.0])
    with pytest.raises(ValueError):
        classical_rms_commuting(SIGMA_X, pi1_sharp(), PSI0)
    p = sharp_from_observable(np.diag([2.0, 0.0]))
    # diagonal: outcome 2 on |0> (A=1) and 0 on |1> (A=-1), state |+z>: (2 - 1)^2 = 1
    assert classical_rms_commuting(a, p, PSI0) == pytest.approx(1.0)
    assert eps_no(a, p, PSI0) == pytest.approx(1.0)


def test_bhl_instances_fool_eps_no_but_not_eps_bar():
    rng = np.random.default_rng(12)
    fooled = 0
    for _ in range(20):
        a, p, psi = bhl_instance(2, rng)
        assert eps_no(a, p, psi) < 1e-9
        if not is_accurate(a, p, psi, tol=1e-6):
            fooled += 1
            assert eps_bar(a, p, psi)[0] > 1e-6
    assert fooled > 0


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        eps_no(np.eye(3), pi1_sharp(), PSI0)
    with pytest.raises(ValueError):
        eps_no(SIGMA_Z, pi1_sharp(), np.ones(3) / math.sqrt(3))


@pytest.mark.parametrize("dim", [2, 3])
def test_check_requirements_passes(dim):
    report = check_requirements(20, seed=1, dim=dim)
    assert report.passed, report.to_dict()
    assert report["completeness"].details["eps_no_counterexamples"] > 0
    bhl = report["bhl_counterexample"].details
    assert bhl["accurate"] is False and bhl["eps_bar"] == pytest.approx(2.0, abs=1e-9)


def test_check_requirements_is_reproducible():
    assert check_requirements(5, seed=3).to_dict() == check_requirements(5, seed=3).to_dict()
    with pytest.raises(ValueError):
        check_requirements(0, seed=0)
