"""Monte Carlo counting model of the polarimeter run.

Each analyzer setting is modelled as two Poisson count records, one for the
selected projector and one for its complement; the projector probability
is estimated by the count ratio. Unsharp POVM elements are acquired by
randomly switching between settings at ``slice_hz`` and recombining the
per-setting estimates with their classical weights.

Random streams come from :class:`numpy.random.SeedSequence` keyed by
``(seed, alpha index, setting index)``, so every point of a run can be
recomputed on its own and the order of evaluation does not matter.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ErrorProfile
from .linalg import as_state, expectation
from .povm import Povm, pi1_sharp, pi2_unsharp
from .threestate import (
    TERM_NAMES,
    EpsilonEstimate,
    PlanComponent,
    RandomizedPlan,
    TermDecomposition,
    assemble,
    example_plan,
    unsharp_element_plan,
)

__all__ = [
    "BeamConfig",
    "CountRecord",
    "ExpectationEstimate",
    "ExperimentResult",
    "InsufficientExposureError",
    "RandomizedEstimate",
    "RandomizedPlan",
    "run_experiment",
    "simulate_projector",
    "simulate_randomized_povm",
    "unsharp_element_plan",
]


class InsufficientExposureError(RuntimeError):
    """A setting collected no counts (or no time slices)."""


@dataclass(frozen=True)
class BeamConfig:
    rate: float = 350.0  # counts per second
    duration: float = 100.0  # seconds per setting
    slice_hz: float = 10.0
    seed: int = 0

    def __post_init__(self):
        for name in ("rate", "duration", "slice_hz"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if int(self.seed) != self.seed or self.seed < 0 or self.seed >= 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    @property
    def n_slices(self) -> int:
        return max(int(round(self.duration * self.slice_hz)), 1)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CountRecord:
    slices: int
    counts: int
    complement: int
    exposure: float  # seconds

    @property
    def total(self) -> int:
        return self.counts + self.complement

    def is_plausible(self, rate: float) -> bool:
        """Loose sanity bound: total counts within 10 sigma of ``rate * exposure``."""
        mean = rate * self.exposure
        return abs(self.total - mean) <= 10.0 * math.sqrt(mean) + 10.0


@dataclass(frozen=True)
class ExpectationEstimate:
    value: float
    sigma: float
    records: tuple[CountRecord, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class RandomizedEstimate:
    settings: tuple[ExpectationEstimate, ...]
    combined: ExpectationEstimate


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 stream for ``(seed, *key)``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def _true_probability(psi, proj) -> float:
    return min(max(expectation(psi, proj), 0.0), 1.0)


def _ratio_estimate(counts: int, complement: int) -> tuple[float, float]:
    total = counts + complement
    if total == 0:
        raise InsufficientExposureError("no counts recorded; increase rate or duration")
    p_hat = counts / total
    return p_hat, math.sqrt(p_hat * (1.0 - p_hat) / total)


def simulate_projector(psi, proj, cfg: BeamConfig, rng: np.random.Generator | None = None) -> ExpectationEstimate:
    """Estimate ``<psi|proj|psi>`` from one fixed analyzer setting.

    Draws ``N+ ~ Poisson(rate * duration * p)`` and
    ``N- ~ Poisson(rate * duration * (1 - p))`` and returns
    ``N+ / (N+ + N-)`` with its binomial standard deviation.
    """
    psi = as_state(psi)
    proj = np.asarray(proj, dtype=complex)
    if np.max(np.abs(proj @ proj - proj)) > 1e-9 or np.max(np.abs(proj - proj.conj().T)) > 1e-12:
        raise ValueError("analyzer setting must be a Hermitian projector")
    if rng is None:
        rng = stream(cfg.seed)
    p = _true_probability(psi, proj)
    n = cfg.rate * cfg.duration
    counts = int(rng.poisson(n * p))
    complement = int(rng.poisson(n * (1.0 - p)))
    value, sigma = _ratio_estimate(counts, complement)
    return ExpectationEstimate(value, sigma, (CountRecord(cfg.n_slices, counts, complement, cfg.duration),))


def simulate_randomized_povm(
    psi, plan: RandomizedPlan, cfg: BeamConfig, rng: np.random.Generator | None = None
) -> RandomizedEstimate:
    """Acquire a randomized POVM element slice by slice.

    Every ``1 / slice_hz`` seconds one setting is drawn with its selection
    probability and counts for that slice are added to that setting's
    record. The element probability is ``sum(weight * p_hat)`` over
    settings, with independent per-setting errors.
    """
    psi = as_state(psi)
    if rng is None:
        rng = stream(cfg.seed)
    k = len(plan.settings)
    probs = np.array([s.probability for s in plan.settings])
    truth = np.array([_true_probability(psi, s.projector) for s in plan.settings])

    n_slices = cfg.n_slices
    dt = 1.0 / cfg.slice_hz
    choice = rng.choice(k, size=n_slices, p=probs)
    mean = cfg.rate * dt
    plus = rng.poisson(mean * truth[choice])
    minus = rng.poisson(mean * (1.0 - truth[choice]))

    slices = np.bincount(choice, minlength=k)
    plus_tot = np.bincount(choice, weights=plus, minlength=k).astype(np.int64)
    minus_tot = np.bincount(choice, weights=minus, minlength=k).astype(np.int64)

    estimates = []
    for i in range(k):
        if slices[i] == 0:
            raise InsufficientExposureError(f"setting {i} was never selected in {n_slices} slices")
        value, sigma = _ratio_estimate(int(plus_tot[i]), int(minus_tot[i]))
        record = CountRecord(int(slices[i]), int(plus_tot[i]), int(minus_tot[i]), slices[i] * dt)
        estimates.append(ExpectationEstimate(value, sigma, (record,)))

    weights = np.array([s.weight for s in plan.settings])
    value = float(np.dot(weights, [e.value for e in estimates]))
    sigma = float(math.sqrt(np.dot(weights**2, [e.sigma**2 for e in estimates])))
    records = tuple(r for e in estimates for r in e.records)
    return RandomizedEstimate(tuple(estimates), ExpectationEstimate(value, sigma, records))


def _simulate_component(state, comp: PlanComponent, cfg: BeamConfig, rng) -> ExpectationEstimate:
    if comp.plan.is_single_projector:
        return simulate_projector(state, comp.plan.settings[0].projector, cfg, rng)
    return simulate_randomized_povm(state, comp.plan, cfg, rng).combined


def _simulate_entry(entry, cfg: BeamConfig, key: tuple[int, ...]) -> tuple[float, float]:
    value = 0.0
    var = 0.0
    for j, comp in enumerate(entry.components):
        est = _simulate_component(entry.state, comp, cfg, stream(cfg.seed, *key, j))
        value += comp.coefficient * est.value
        var += (comp.coefficient * est.sigma) ** 2
    return value, math.sqrt(var)


@dataclass
class ExperimentResult:
    """Estimated profile with per-point terms and assembled estimates."""

    kind: str
    config: BeamConfig
    alphas: np.ndarray
    terms: list[TermDecomposition]
    estimates: list[EpsilonEstimate]
    profile: ErrorProfile

    @property
    def epsilon(self) -> np.ndarray:
        return np.array([e.epsilon for e in self.estimates])

    @property
    def sigma(self) -> np.ndarray:
        return np.array([e.sigma for e in self.estimates])

    @property
    def on_square(self) -> np.ndarray:
        return np.array([e.on_square for e in self.estimates])

    def z_scores(self, expected) -> np.ndarray:
        """Standardized residuals against expected epsilon values.

        Points flagged ``on_square`` are compared as squared errors.
        """
        expected = np.asarray(expected, dtype=float)
        out = np.empty(len(self.estimates))
        for i, (est, ref) in enumerate(zip(self.estimates, expected)):
            if est.on_square:
                out[i] = (est.eps_sq - ref**2) / est.sigma_sq
            else:
                out[i] = (est.epsilon - ref) / est.sigma
        return out

    def reduced_chi2(self, expected) -> float:
        z = self.z_scores(expected)
        return float(np.sum(z**2) / z.size)

    def term_table(self) -> list[dict[str, float]]:
        return [t.values() for t in self.terms]


def _povm_for(kind: str) -> Povm:
    if kind == "sharp":
        return pi1_sharp()
    if kind == "unsharp":
        return pi2_unsharp()
    raise ValueError(f"measurement kind must be 'sharp' or 'unsharp', got {kind!r}")


def run_experiment(povm_kind: str, alphas, cfg: BeamConfig | None = None) -> ExperimentResult:
    """Simulate the full three-state acquisition for every angle.

    For the sharp measurement the ``|+x>`` preparation does not depend on
    alpha and is acquired once per run; the unsharp one re-acquires it at
    every angle.
    """
    cfg = cfg or BeamConfig()
    p = _povm_for(povm_kind)
    alphas = np.asarray(alphas, dtype=float)
    shared: dict[str, tuple[float, float]] = {}
    terms: list[TermDecomposition] = []
    estimates: list[EpsilonEstimate] = []
    for i, alpha in enumerate(alphas):
        plan = example_plan(float(alpha), p)
        values: dict[str, float] = {}
        sigmas: dict[str, float] = {}
        for t_idx, name in enumerate(TERM_NAMES):
            entry = plan.entry(name)
            if entry.shared and povm_kind == "sharp":
                if name not in shared:
                    shared[name] = _simulate_entry(entry, cfg, (1, t_idx))
                values[name], sigmas[name] = shared[name]
            else:
                values[name], sigmas[name] = _simulate_entry(entry, cfg, (0, i, t_idx))
        term = TermDecomposition(**values, sigmas=sigmas)
        terms.append(term)
        estimates.append(assemble(term))

    eps = np.array([e.epsilon for e in estimates])
    sig = np.array([e.sigma for e in estimates])
    best = int(np.argmax(eps)) if eps.size else 0
    prof = ErrorProfile(
        alphas=alphas,
        epsilon=eps,
        eps_bar=float(eps[best]) if eps.size else 0.0,
        argmax_alpha=float(alphas[best]) if eps.size else 0.0,
        sigma=sig,
    )
    return ExperimentResult(povm_kind, cfg, alphas, terms, estimates, prof)
