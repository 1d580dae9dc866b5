"""Three-state decomposition of the squared error into measurable terms.

Using ``(A-1) M (A-1) - A M A - M = -(M A + A M)`` the bias term
``<(A - M)^2>`` splits into expectation values that only ever require
measuring ``M`` (or ``A``, ``M^2``) in a handful of prepared states:

    eps^2 = <A^2> + <M^2> - <M> - <A M A> + <(A-1) M (A-1)> + <M2 - M^2>

For ``A = 1 + sigma_x`` the state ``(A - 1)|psi(alpha)>`` is
``|psi(alpha + pi)>`` up to phase and ``A|psi>`` is always proportional
to ``|+x>``, so three preparations suffice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .counterexample import OBSERVABLE_A, psi_alpha
from .linalg import (
    IDENTITY2,
    KET_MINUS_X,
    KET_MINUS_Z,
    KET_PLUS_X,
    KET_PLUS_Z,
    SIGMA_X,
    SIGMA_Z,
    as_observable,
    as_state,
    expectation,
    projector,
)
from .povm import Povm, moment, pi1_sharp, pi2_unsharp, second_moment

TERM_NAMES = ("t_A2", "t_M2", "t_M", "t_AMA", "t_shift", "t_unsharp")
# sign with which each term enters eps^2
TERM_SIGNS = {"t_A2": 1.0, "t_M2": 1.0, "t_M": -1.0, "t_AMA": -1.0, "t_shift": 1.0, "t_unsharp": 1.0}
CLAMP_TOL = 1e-9

# weights of the no-measurement pair and the sigma_m projector in Pi_2(+-2)
GAMMA_NO = (2 - math.sqrt(2)) / 4
GAMMA_PROJ = 1 / math.sqrt(2)

SIGMA_M = (SIGMA_X + SIGMA_Z) / math.sqrt(2)
P_M_PLUS = (IDENTITY2 + SIGMA_M) / 2
P_M_MINUS = (IDENTITY2 - SIGMA_M) / 2
P_X_PLUS = projector(KET_PLUS_X)
P_X_MINUS = projector(KET_MINUS_X)
P_Z_PLUS = projector(KET_PLUS_Z)
P_Z_MINUS = projector(KET_MINUS_Z)


@dataclass
class TermDecomposition:
    """The six expectation values, each with an optional standard deviation.

    ``t_M`` and ``t_AMA`` are stored as the plain expectation values; they
    enter the squared error with a minus sign.
    """

    t_A2: float
    t_M2: float
    t_M: float
    t_AMA: float
    t_shift: float
    t_unsharp: float
    sigmas: dict[str, float] = field(default_factory=dict)

    def values(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in TERM_NAMES}

    def sigma(self, name: str) -> float:
        return self.sigmas.get(name, 0.0)

    def signed_sum(self) -> float:
        return sum(TERM_SIGNS[name] * getattr(self, name) for name in TERM_NAMES)

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in TERM_NAMES)


class EpsilonEstimate(tuple):
    """``(epsilon, sigma)`` with the squared-domain values attached.

    When the signed sum is too close to zero for first-order propagation
    through the square root, ``on_square`` is set and ``sigma`` holds the
    standard deviation of ``eps_sq`` instead of ``epsilon``.
    """

    def __new__(cls, epsilon, sigma, eps_sq, sigma_sq, on_square):
        obj = super().__new__(cls, (epsilon, sigma))
        obj.eps_sq = eps_sq
        obj.sigma_sq = sigma_sq
        obj.on_square = on_square
        return obj

    @property
    def epsilon(self) -> float:
        return self[0]

    @property
    def sigma(self) -> float:
        return self[1]

    def __repr__(self) -> str:
        tag = ", on_square" if self.on_square else ""
        return f"EpsilonEstimate(epsilon={self[0]!r}, sigma={self[1]!r}{tag})"


def symmetrization_identity_check(a, m) -> float:
    """Max-norm residual of ``(A-1)M(A-1) - AMA - M + (MA + AM)``; zero for any A, M."""
    a = as_observable(a)
    m = as_observable(m)
    if a.shape != m.shape:
        raise ValueError("A and M must have the same dimension")
    one = np.eye(a.shape[0])
    lhs = (a - one) @ m @ (a - one) - a @ m @ a - m
    return float(np.max(np.abs(lhs + (m @ a + a @ m))))


def decompose(a, p: Povm, psi_alpha) -> TermDecomposition:
    """Exact terms for ``a`` measured by ``p`` in the state ``psi_alpha``."""
    a = as_observable(a)
    psi = as_state(psi_alpha)
    if a.shape[0] != p.dim or psi.shape[0] != p.dim:
        raise ValueError("dimension mismatch")
    m = moment(p)
    m2 = second_moment(p)
    one = np.eye(p.dim)
    a_psi = a @ psi
    shifted = (a - one) @ psi
    return TermDecomposition(
        t_A2=float(np.linalg.norm(a_psi) ** 2),
        t_M2=float(np.linalg.norm(m @ psi) ** 2),
        t_M=expectation(psi, m),
        t_AMA=float(np.vdot(a_psi, m @ a_psi).real),
        t_shift=float(np.vdot(shifted, m @ shifted).real),
        t_unsharp=expectation(psi, m2 - m @ m),
    )


def assemble(terms: TermDecomposition) -> EpsilonEstimate:
    """Combine the six terms into ``(epsilon, sigma)``.

    Per-term standard deviations are treated as independent. The signed
    sum is clamped at zero; for noise-free terms a sum below -1e-9 raises.
    ``sigma`` is first-order propagated through the square root unless the
    sum is within two standard deviations of zero, in which case the
    estimate is flagged ``on_square`` and ``sigma`` refers to ``eps_sq``.
    """
    values = terms.as_tuple()
    if not all(math.isfinite(v) for v in values):
        raise ValueError("terms must be finite")
    eps_sq = terms.signed_sum()
    sigma_sq = math.sqrt(sum(terms.sigma(name) ** 2 for name in TERM_NAMES))
    if sigma_sq == 0.0 and eps_sq < -CLAMP_TOL:
        raise ValueError(f"terms sum to a negative squared error ({eps_sq:.3e})")
    eps = math.sqrt(max(eps_sq, 0.0))
    if sigma_sq == 0.0:
        return EpsilonEstimate(eps, 0.0, eps_sq, 0.0, False)
    if eps_sq < 2.0 * sigma_sq:
        return EpsilonEstimate(eps, sigma_sq, eps_sq, sigma_sq, True)
    return EpsilonEstimate(eps, sigma_sq / (2.0 * eps), eps_sq, sigma_sq, False)


# ---------------------------------------------------------------------------
# measurement plans for A = 1 + sigma_x


@dataclass(frozen=True, eq=False)
class Setting:
    """One analyzer setting: a projector, how often it is chosen, and its weight."""

    projector: np.ndarray
    probability: float
    weight: float


@dataclass(frozen=True, eq=False)
class RandomizedPlan:
    """A POVM element realized as a weighted mix of projective settings.

    The effect is ``sum(weight * projector)``; during acquisition each
    time slice picks one setting according to ``probability``.
    """

    settings: tuple[Setting, ...]

    def __post_init__(self):
        total = sum(s.probability for s in self.settings)
        if not self.settings or abs(total - 1.0) > 1e-12:
            raise ValueError(f"selection probabilities must sum to 1, got {total!r}")

    @property
    def effect(self) -> np.ndarray:
        return sum(s.weight * s.projector for s in self.settings)

    @property
    def is_single_projector(self) -> bool:
        return len(self.settings) == 1 and self.settings[0].weight == 1.0

    @classmethod
    def single(cls, proj) -> "RandomizedPlan":
        return cls((Setting(np.asarray(proj, dtype=complex), 1.0, 1.0),))


def unsharp_element_plan(sign: int, no_measurement: str = "x") -> RandomizedPlan:
    """Randomized realization of ``Pi_2(2 * sign)``.

    ``gamma_no * (P(+1) + P(-1)) + gamma_proj * P_sigma_m(sign)`` where the
    no-measurement pair is the sigma_x (or sigma_z) eigenbasis. The pair is
    chosen with total probability ``gamma_no / (gamma_no + gamma_proj)``,
    split evenly.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    pair = {"x": (P_X_PLUS, P_X_MINUS), "z": (P_Z_PLUS, P_Z_MINUS)}[no_measurement]
    norm = GAMMA_NO + GAMMA_PROJ
    p_no = 0.5 * GAMMA_NO / norm
    proj = P_M_PLUS if sign == 1 else P_M_MINUS
    return RandomizedPlan(
        (
            Setting(pair[0], p_no, GAMMA_NO),
            Setting(pair[1], p_no, GAMMA_NO),
            Setting(proj, GAMMA_PROJ / norm, GAMMA_PROJ),
        )
    )


@dataclass(frozen=True, eq=False)
class PlanComponent:
    coefficient: float
    plan: RandomizedPlan


@dataclass(frozen=True, eq=False)
class PlanEntry:
    """One term: ``sum(coefficient * <state|effect|state>)`` over components.

    ``shared`` marks entries whose state does not depend on alpha.
    """

    term: str
    state: np.ndarray
    components: tuple[PlanComponent, ...]
    shared: bool = False

    def exact_value(self) -> float:
        return sum(c.coefficient * expectation(self.state, c.plan.effect) for c in self.components)


@dataclass(frozen=True, eq=False)
class MeasurementPlan:
    alpha: float
    kind: str
    entries: tuple[PlanEntry, ...]

    def __post_init__(self):
        names = sorted(e.term for e in self.entries)
        if names != sorted(TERM_NAMES):
            raise ValueError(f"plan must cover exactly {TERM_NAMES}, got {names}")

    def entry(self, term: str) -> PlanEntry:
        for e in self.entries:
            if e.term == term:
                return e
        raise KeyError(term)

    def exact_terms(self) -> TermDecomposition:
        return TermDecomposition(**{e.term: e.exact_value() for e in self.entries})


def _same_povm(p: Povm, q: Povm, tol: float = 1e-9) -> bool:
    if len(p) != len(q) or p.dim != q.dim:
        return False
    for x, e in q:
        try:
            f = p.effect(x, tol)
        except KeyError:
            return False
        if np.max(np.abs(e - f)) > tol:
            return False
    return True


def povm_kind(p: Povm) -> str:
    """``'sharp'`` for Pi_1, ``'unsharp'`` for Pi_2; anything else raises."""
    if _same_povm(p, pi1_sharp()):
        return "sharp"
    if _same_povm(p, pi2_unsharp()):
        return "unsharp"
    raise ValueError(f"no measurement plan for {p!r}; only the sharp and unsharp M measurements are supported")


def _m_components(kind: str, scale: float, no_measurement: str = "x") -> tuple[PlanComponent, ...]:
    """Components for ``scale * <M>``."""
    if kind == "sharp":
        r2 = math.sqrt(2)
        return (
            PlanComponent(scale * r2, RandomizedPlan.single(P_M_PLUS)),
            PlanComponent(-scale * r2, RandomizedPlan.single(P_M_MINUS)),
        )
    return (
        PlanComponent(2.0 * scale, unsharp_element_plan(1, no_measurement)),
        PlanComponent(-2.0 * scale, unsharp_element_plan(-1, no_measurement)),
    )


def _identity_components(scale: float) -> tuple[PlanComponent, ...]:
    return (
        PlanComponent(scale, RandomizedPlan.single(P_X_PLUS)),
        PlanComponent(scale, RandomizedPlan.single(P_X_MINUS)),
    )


def example_plan(alpha: float, p: Povm) -> MeasurementPlan:
    """Measurement plan for ``A = 1 + sigma_x`` and the sharp or unsharp M measurement.

    States: ``|psi(alpha)>`` for ``A^2``, ``M^2``, ``M`` and the unsharp
    term; ``|psi(alpha + pi)>`` for the shifted term; ``|+x>`` for
    ``A M A = 2 <+x|M|+x>``. The no-measurement pair is sigma_x except in
    ``|+x>``, where the sigma_z pair is used.
    """
    kind = povm_kind(p)
    state = psi_alpha(alpha)
    entries = [
        PlanEntry("t_A2", state, (PlanComponent(4.0, RandomizedPlan.single(P_X_PLUS)),)),
        PlanEntry("t_M2", state, _identity_components(2.0)),
        PlanEntry("t_M", state, _m_components(kind, 1.0)),
        PlanEntry("t_AMA", KET_PLUS_X.copy(), _m_components(kind, 2.0, no_measurement="z"), shared=True),
        PlanEntry("t_shift", psi_alpha(alpha + math.pi), _m_components(kind, 1.0)),
        PlanEntry("t_unsharp", state, _identity_components(2.0) if kind == "unsharp" else ()),
    ]
    return MeasurementPlan(alpha, kind, tuple(entries))


def example_terms(alpha: float, p: Povm) -> TermDecomposition:
    """Exact terms for the example observable in ``|psi(alpha)>``."""
    return decompose(OBSERVABLE_A, p, psi_alpha(alpha))
