import math

import numpy as np
import pytest

from qrms.counterexample import OBSERVABLE_A, psi_alpha, sharp_profile, unsharp_profile
from qrms.errors import eps_no, random_instance
from qrms.linalg import random_hermitian
from qrms.povm import pi1_sharp, pi2_unsharp, random_povm
from qrms.threestate import (
    GAMMA_NO,
    GAMMA_PROJ,
    TERM_NAMES,
    TermDecomposition,
    assemble,
    decompose,
    example_plan,
    example_terms,
    symmetrization_identity_check,
    unsharp_element_plan,
)

ALPHAS = np.linspace(0, 2 * math.pi, 33)


def test_symmetrization_identity():
    rng = np.random.default_rng(0)
    for _ in range(200):
        d = int(rng.integers(1, 5))
        assert symmetrization_identity_check(random_hermitian(d, rng), random_hermitian(d, rng)) < 1e-12


def test_decompose_assemble_matches_eps_no():
    rng = np.random.default_rng(1)
    for _ in range(300):
        a, p, psi = random_instance(int(rng.integers(2, 4)), rng)
        est = assemble(decompose(a, p, psi))
        assert est.epsilon == pytest.approx(eps_no(a, p, psi), abs=1e-10)
        assert est.sigma == 0.0 and not est.on_square


def test_example_terms_closed_form():
    for alpha in ALPHAS:
        t = example_terms(alpha, pi1_sharp())
        # Bloch vector (0, sin a, cos a): <sigma_x> = 0, <sigma_z> = cos a
        assert t.t_A2 == pytest.approx(2.0, abs=1e-12)
        assert t.t_M == pytest.approx(math.cos(alpha), abs=1e-12)
        assert t.t_shift == pytest.approx(-math.cos(alpha), abs=1e-12)
        assert t.t_AMA == pytest.approx(2.0, abs=1e-12)
        assert t.t_M2 == pytest.approx(2.0, abs=1e-12)
        assert t.t_unsharp == pytest.approx(0.0, abs=1e-12)
        u = example_terms(alpha, pi2_unsharp())
        assert u.t_unsharp == pytest.approx(2.0, abs=1e-12)
        assert u.t_M2 == pytest.approx(2.0, abs=1e-12)
        assert t.signed_sum() == pytest.approx(sharp_profile(alpha) ** 2, abs=1e-12)
        assert u.signed_sum() == pytest.approx(unsharp_profile(alpha) ** 2, abs=1e-12)


def test_plan_exact_values_reproduce_terms():
    for p in (pi1_sharp(), pi2_unsharp()):
        for alpha in ALPHAS:
            plan = example_plan(alpha, p)
            got = plan.exact_terms().as_tuple()
            want = example_terms(alpha, p).as_tuple()
            np.testing.assert_allclose(got, want, atol=1e-12)


def test_unsharp_element_plan_effect():
    p = pi2_unsharp()
    for sign in (1, -1):
        for pair in ("x", "z"):
            plan = unsharp_element_plan(sign, pair)
            np.testing.assert_allclose(plan.effect, p.effect(2.0 * sign), atol=1e-12)
            assert sum(s.probability for s in plan.settings) == pytest.approx(1.0)
    assert GAMMA_NO == pytest.approx((2 - math.sqrt(2)) / 4)
    assert GAMMA_PROJ == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(ValueError):
        unsharp_element_plan(0)


def test_plan_rejects_other_povms():
    rng = np.random.default_rng(2)
    with pytest.raises(ValueError):
        example_plan(0.0, random_povm(2, 2, rng))


def test_assemble_error_propagation():
    exact = example_terms(math.pi, pi2_unsharp())
    sig = {name: 0.01 for name in TERM_NAMES}
    t = TermDecomposition(*exact.as_tuple(), sigmas=sig)
    est = assemble(t)
    sigma_sq = math.sqrt(6) * 0.01
    assert est.sigma_sq == pytest.approx(sigma_sq)
    assert est.sigma == pytest.approx(sigma_sq / (2 * math.sqrt(6)))
    assert not est.on_square


def test_assemble_near_zero_flags_square_domain():
    exact = example_terms(0.0, pi1_sharp())
    t = TermDecomposition(*exact.as_tuple()[:-1], exact.t_unsharp - 0.003, sigmas={"t_A2": 0.01})
    est = assemble(t)
    assert est.epsilon == 0.0 and est.on_square and est.sigma == pytest.approx(0.01)


def test_assemble_rejects_negative_exact_sum():
    with pytest.raises(ValueError):
        assemble(TermDecomposition(0.0, 0.0, 1.0, 0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        assemble(TermDecomposition(math.nan, 0.0, 0.0, 0.0, 0.0, 0.0))
    # tiny negative round-off is clamped
    assert assemble(TermDecomposition(0.0, 0.0, 1e-12, 0.0, 0.0, 0.0)).epsilon == 0.0


def test_psi_alpha_shift_by_pi():
    # rotating by pi more flips the y and z Bloch components
    for alpha in ALPHAS:
        overlap = abs(np.vdot(psi_alpha(alpha + math.pi), psi_alpha(alpha)))
        assert overlap == pytest.approx(0.0, abs=1e-12)
        assert np.linalg.norm(OBSERVABLE_A @ psi_alpha(alpha)) ** 2 == pytest.approx(2.0, abs=1e-12)
