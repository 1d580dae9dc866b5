"""Noise-operator q-rms error, its error profile and the locally uniform error.

The noise-operator error of measuring ``A`` with POVM ``p`` in ``psi`` is

    eps_no**2 = <psi|(A - M)**2|psi> + <psi|M2 - M**2|psi>

with ``M`` and ``M2`` the first and second moment operators of ``p``. The
error profile evaluates it along the orbit ``exp(i alpha G / 2) psi`` where
``G`` is ``A`` minus its trace part, and the locally uniform error is the
supremum of that profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from .linalg import (
    as_observable,
    as_state,
    evolve,
    matrix_sqrt_psd,
    random_hermitian,
    random_state,
    random_unitary,
    spectral_decompose,
)
from .povm import (
    Povm,
    is_accurate,
    moment,
    naimark_dilate,
    random_commuting_instance,
    random_povm,
    sharp_from_observable,
)

GRID_POINTS = 2048
GOLDEN_TOL = 1e-8
MAX_DENOMINATOR = 64
RATIONAL_TOL = 1e-9
# horizon used when the generator's spectral gaps are incommensurate
FALLBACK_HORIZON = 64 * math.pi
COMMUTE_TOL = 1e-9
RADICAND_CLAMP = -1e-10
RADICAND_REJECT = -1e-8


def profile_generator(a) -> np.ndarray:
    """``A - tr(A)/d``; the trace part only adds a global phase."""
    a = as_observable(a)
    d = a.shape[0]
    return a - (np.trace(a).real / d) * np.eye(d)


def _check(a, p: Povm, psi):
    a = as_observable(a)
    psi = as_state(psi)
    if a.shape[0] != p.dim or psi.shape[0] != p.dim:
        raise ValueError(f"dimension mismatch: A is {a.shape[0]}, POVM is {p.dim}, state is {psi.shape[0]}")
    return a, psi


class _NoiseForm:
    """Precomputed pieces of eps_no**2 as a sum of squared vector norms.

    ``<(A-M)^2> = ||(A-M) psi||^2`` and ``<M2 - M^2> = sum_x ||sqrt(E_x)(x - M) psi||^2``.
    Written this way the radicand is a sum of squares and sharp, accurate
    points come out at round-off level squared instead of round-off level.
    """

    def __init__(self, a: np.ndarray, p: Povm):
        m = moment(p)
        d = p.dim
        self.bias = a - m
        self.spread = [matrix_sqrt_psd(e) @ (x * np.eye(d) - m) for x, e in p]

    def squared(self, states: np.ndarray) -> np.ndarray:
        """eps**2 for each column of ``states`` (shape (d, n))."""
        total = np.sum(np.abs(self.bias @ states) ** 2, axis=0)
        for c in self.spread:
            total = total + np.sum(np.abs(c @ states) ** 2, axis=0)
        return total


def _radicand_sqrt(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < RADICAND_REJECT):
        raise ValueError(f"negative error radicand {r.min():.3e}; effects do not form a POVM")
    return np.sqrt(np.where(r < RADICAND_CLAMP, 0.0, np.maximum(r, 0.0)))


def eps_no_squared(a, p: Povm, psi) -> float:
    a, psi = _check(a, p, psi)
    return float(_NoiseForm(a, p).squared(psi[:, None])[0])


def eps_no(a, p: Povm, psi) -> float:
    """Noise-operator q-rms error of measuring ``a`` with ``p`` in ``psi``."""
    return float(_radicand_sqrt(eps_no_squared(a, p, psi)))


def eps_profile_at(a, p: Povm, psi, alpha: float) -> float:
    """Error profile at rotation angle ``alpha``.

    >>> from qrms.counterexample import OBSERVABLE_A, PSI0
    >>> from qrms.povm import pi2_unsharp
    >>> round(eps_profile_at(OBSERVABLE_A, pi2_unsharp(), PSI0, math.pi) ** 2, 12)
    6.0
    """
    a, psi = _check(a, p, psi)
    return eps_no(a, p, evolve(psi, profile_generator(a), alpha))


class _ProfileEvaluator:
    def __init__(self, a, p: Povm, psi):
        a, psi = _check(a, p, psi)
        self.psi = psi
        dec = spectral_decompose(profile_generator(a))
        self.levels = dec.eigenvalues
        self.components = np.stack([proj @ psi for proj in dec.projectors], axis=1)
        self.form = _NoiseForm(a, p)

    def states(self, alphas: np.ndarray) -> np.ndarray:
        phases = np.exp(0.5j * np.outer(self.levels, alphas))
        out = self.components @ phases
        out[:, alphas == 0.0] = self.psi[:, None]
        return out

    def __call__(self, alphas) -> np.ndarray:
        alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
        return _radicand_sqrt(self.form.squared(self.states(alphas)))


def profile(a, p: Povm, psi, alphas) -> np.ndarray:
    """Vectorized error profile over an array of angles."""
    return _ProfileEvaluator(a, p, psi)(alphas)


def profile_period(a) -> tuple[float, bool]:
    """Period in alpha of the profile generated by ``a``.

    The state picks up relative phases ``alpha * g / 2`` for every spectral
    gap ``g`` of the generator. If all gaps are rational multiples (with
    denominator <= 64) of the smallest one the profile is periodic;
    otherwise ``(FALLBACK_HORIZON, False)`` is returned. Periods longer than
    the fallback horizon are also truncated to it.
    """
    levels = spectral_decompose(profile_generator(a)).eigenvalues
    gaps = [levels[i] - levels[j] for i in range(len(levels)) for j in range(i + 1, len(levels))]
    if not gaps:
        return 2 * math.pi, True
    base = min(gaps)
    denominators = []
    for g in gaps:
        ratio = g / base
        frac = Fraction(ratio).limit_denominator(MAX_DENOMINATOR)
        if abs(ratio - float(frac)) > RATIONAL_TOL:
            return FALLBACK_HORIZON, False
        denominators.append(frac.denominator)
    lcm = reduce(math.lcm, denominators, 1)
    period = 4 * math.pi * lcm / base
    if period > FALLBACK_HORIZON:
        return FALLBACK_HORIZON, False
    return period, True


def _golden_max(f, lo: float, hi: float, tol: float = GOLDEN_TOL) -> float:
    invphi = (math.sqrt(5) - 1) / 2
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


@dataclass
class ErrorProfile:
    """Sampled profile plus its supremum.

    ``sigma`` is only set for estimated (simulated) profiles.
    """

    alphas: np.ndarray
    epsilon: np.ndarray
    eps_bar: float
    argmax_alpha: float
    period: float = 2 * math.pi
    periodic: bool = True
    sigma: np.ndarray | None = field(default=None, repr=False)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.alphas.tolist(), self.epsilon.tolist()))


def error_profile(a, p: Povm, psi, n_grid: int = GRID_POINTS) -> ErrorProfile:
    """Grid scan over one period followed by golden-section refinement.

    The grid has ``n_grid`` points per 2*pi of alpha. The best grid point
    (lowest alpha on ties) is refined within one grid step on either side
    until the bracket is narrower than 1e-8.
    """
    evaluator = _ProfileEvaluator(a, p, psi)
    period, periodic = profile_period(a)
    n = int(round(n_grid * period / (2 * math.pi)))
    alphas = np.arange(n) * (period / n)
    eps = evaluator(alphas)
    best = int(np.argmax(eps))
    best_val = float(eps[best])
    best_alpha = float(alphas[best])

    step = period / n
    ref_alpha = _golden_max(lambda x: float(evaluator(x)[0]), best_alpha - step, best_alpha + step)
    ref_val = float(evaluator(ref_alpha)[0])
    if ref_val > best_val + 1e-14 * max(1.0, best_val):
        best_val = ref_val
        best_alpha = ref_alpha % period if periodic else ref_alpha
    return ErrorProfile(alphas, eps, best_val, best_alpha, period, periodic)


def eps_bar(a, p: Povm, psi) -> tuple[float, float]:
    """Locally uniform q-rms error and the angle where it is attained."""
    prof = error_profile(a, p, psi)
    return prof.eps_bar, prof.argmax_alpha


def classical_rms_commuting(a, p: Povm, psi) -> float:
    """Classical rms error from the joint distribution of commuting ``a`` and ``p``.

    ``sqrt(sum_{lam, x} (x - lam)**2 <psi|P_A(lam) E(x)|psi>)``; every
    effect must commute with ``a`` within 1e-9.
    """
    a, psi = _check(a, p, psi)
    for x, e in p:
        comm = float(np.max(np.abs(a @ e - e @ a)))
        if comm > COMMUTE_TOL:
            raise ValueError(f"effect for outcome {x} does not commute with A (|[A, E]| = {comm:.3e})")
    dec = spectral_decompose(a)
    total = 0.0
    for lam, proj in zip(dec.eigenvalues, dec.projectors):
        for x, e in p:
            joint = np.vdot(psi, proj @ e @ psi).real
            total += (x - lam) ** 2 * joint
    return float(_radicand_sqrt(total))


def dilation_noise_norm(a, p: Povm, psi) -> float:
    """Noise-operator error computed on an explicit Naimark dilation."""
    a, psi = _check(a, p, psi)
    return naimark_dilate(p).noise_norm(a, psi)


# ---------------------------------------------------------------------------
# requirement checks


@dataclass
class RequirementResult:
    name: str
    passed: bool
    trials: int
    max_violation: float = 0.0
    counterexample: dict | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "trials": self.trials,
            "max_violation": self.max_violation,
            "counterexample": self.counterexample,
            "details": self.details,
        }


@dataclass
class RequirementReport:
    seed: int
    dim: int
    results: list[RequirementResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> RequirementResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "dim": self.dim,
            "passed": self.passed,
            "results": [r.to_dict() for r in self.results],
        }


def _encode(arr) -> list:
    arr = np.asarray(arr)
    return [[float(z.real), float(z.imag)] for z in arr.ravel()]


def _instance_dict(a, p: Povm, psi, **extra) -> dict:
    out = {
        "A": _encode(a),
        "values": list(p.values),
        "effects": [_encode(e) for e in p.effects],
        "psi": _encode(psi),
    }
    out.update(extra)
    return out


def _stream(seed: int, key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key,)))


def random_instance(dim: int, rng: np.random.Generator):
    """Random observable, POVM (2 to 4 outcomes) and pure state."""
    a = random_hermitian(dim, rng)
    p = random_povm(dim, int(rng.integers(2, 5)), rng)
    return a, p, random_state(dim, rng)


def random_dichotomic_instance(dim: int, rng: np.random.Generator):
    """``A`` with ``A**2 = 1`` and a two-outcome (+-1) POVM, so ``M2 = 1``."""
    u = random_unitary(dim, rng)
    n_plus = int(rng.integers(1, dim)) if dim > 1 else 1
    signs = np.array([1.0] * n_plus + [-1.0] * (dim - n_plus))
    a = u @ np.diag(signs) @ u.conj().T
    a = (a + a.conj().T) / 2
    p = random_povm(dim, 2, rng, values=(1.0, -1.0))
    return a, p, random_state(dim, rng)


def bhl_instance(dim: int, rng: np.random.Generator):
    """A sharp measurement with ``M psi = A psi`` but a different spectrum.

    ``M = A + Q H Q`` with ``Q`` the projector orthogonal to ``psi``, so the
    noise-operator error vanishes while ``M`` generally does not measure ``A``.
    """
    psi = random_state(dim, rng)
    a = random_hermitian(dim, rng)
    q = np.eye(dim) - np.outer(psi, psi.conj())
    h = random_hermitian(dim, rng, scale=2.0)
    m = a + q @ h @ q
    return a, sharp_from_observable((m + m.conj().T) / 2), psi


def _check_definability(trials, dim, rng):
    worst, cex = 0.0, None
    for _ in range(trials):
        a, p, psi = random_instance(dim, rng)
        ref = eps_no(a, p, psi)
        dil = naimark_dilate(p)
        w = random_unitary(dil.ancilla_dim, rng)
        big_w = np.kron(np.eye(dim), w)
        v2 = big_w @ dil.isometry
        meter2 = big_w @ dil.meter @ big_w.conj().T
        alt = float(np.linalg.norm(meter2 @ (v2 @ psi) - v2 @ (a @ psi)))
        viol = max(abs(dil.noise_norm(a, psi) - ref), abs(alt - ref))
        if viol > worst:
            worst = viol
            if viol > 1e-9 and cex is None:
                cex = _instance_dict(a, p, psi, eps_no=ref, eps_dilated=alt)
    return RequirementResult("operational_definability", worst <= 1e-9, trials, worst, cex)


def _check_correspondence(trials, dim, rng):
    worst, cex = 0.0, None
    for _ in range(trials):
        a, p, psi = random_commuting_instance(dim, int(rng.integers(2, 5)), rng)
        classical = classical_rms_commuting(a, p, psi)
        quantum = eps_no(a, p, psi)
        viol = abs(classical - quantum)
        if viol > worst:
            worst = viol
            if viol > 1e-9 and cex is None:
                cex = _instance_dict(a, p, psi, classical=classical, eps_no=quantum)
    return RequirementResult("correspondence", worst <= 1e-9, trials, worst, cex)


def _check_soundness(trials, dim, rng):
    worst, cex = 0.0, None
    for _ in range(trials):
        a = random_hermitian(dim, rng)
        psi = random_state(dim, rng)
        p = sharp_from_observable(a)
        value, _ = eps_bar(a, p, psi)
        ok = value < 1e-6 and is_accurate(a, p, psi, tol=1e-9)
        worst = max(worst, value)
        if not ok and cex is None:
            cex = _instance_dict(a, p, psi, eps_bar=value)
    return RequirementResult("soundness", cex is None, trials, worst, cex)


def _accurate_along_orbit(a, p, psi, n: int = 64) -> bool:
    period, _ = profile_period(a)
    gen = profile_generator(a)
    return all(
        is_accurate(a, p, evolve(psi, gen, alpha), tol=1e-6) for alpha in np.arange(n) * (period / n)
    )


def _check_completeness(trials, dim, rng):
    """eps_bar ~ 0 must imply accuracy; also count eps_no's failures of the same test."""
    cex = None
    vanished = 0
    no_counterexamples = 0
    min_bar_on_bhl = math.inf
    for i in range(trials):
        if i % 2 == 0:
            a = random_hermitian(dim, rng)
            psi = random_state(dim, rng)
            p = sharp_from_observable(a)
        else:
            a, p, psi = bhl_instance(dim, rng)
        bar, _ = eps_bar(a, p, psi)
        if bar < 1e-6:
            vanished += 1
            if not _accurate_along_orbit(a, p, psi) and cex is None:
                cex = _instance_dict(a, p, psi, eps_bar=bar)
        if eps_no(a, p, psi) < 1e-6 and not is_accurate(a, p, psi, tol=1e-6):
            no_counterexamples += 1
            min_bar_on_bhl = min(min_bar_on_bhl, bar)
    details = {
        "eps_bar_vanished": vanished,
        "eps_no_counterexamples": no_counterexamples,
        "min_eps_bar_on_eps_no_counterexamples": None if math.isinf(min_bar_on_bhl) else min_bar_on_bhl,
    }
    return RequirementResult("completeness", cex is None, trials, 0.0, cex, details)


def _check_dominating(trials, dim, rng):
    worst, cex = 0.0, None
    for _ in range(trials):
        a, p, psi = random_instance(dim, rng)
        no = eps_no(a, p, psi)
        bar, _ = eps_bar(a, p, psi)
        viol = no - bar
        worst = max(worst, viol)
        if viol > 1e-9 and cex is None:
            cex = _instance_dict(a, p, psi, eps_no=no, eps_bar=bar)
    return RequirementResult("dominating", cex is None, trials, max(worst, 0.0), cex)


def _check_conservation(trials, dim, rng, n_grid: int = 512):
    worst, cex = 0.0, None
    for _ in range(trials):
        a, p, psi = random_dichotomic_instance(dim, rng)
        period, _ = profile_period(a)
        prof = profile(a, p, psi, np.arange(n_grid) * (period / n_grid))
        no = eps_no(a, p, psi)
        bar, _ = eps_bar(a, p, psi)
        viol = max(float(np.max(np.abs(prof - prof[0]))), abs(bar - no))
        if viol > worst:
            worst = viol
            if viol > 1e-9 and cex is None:
                cex = _instance_dict(a, p, psi, eps_no=no, eps_bar=bar)
    return RequirementResult("conservation_dichotomic", worst <= 1e-9, trials, worst, cex)


def _check_bhl_example():
    from .counterexample import MOMENT_M, OBSERVABLE_A, PSI0

    p = sharp_from_observable(MOMENT_M)
    no = eps_no(OBSERVABLE_A, p, PSI0)
    bar, arg = eps_bar(OBSERVABLE_A, p, PSI0)
    accurate = is_accurate(OBSERVABLE_A, p, PSI0, tol=1e-9)
    details = {"eps_no": no, "eps_bar": bar, "argmax_alpha": arg, "accurate": accurate}
    # the defect: eps_no vanishes on an inaccurate measurement; the repair: eps_bar does not
    passed = no < 1e-12 and not accurate and bar > 1e-6
    return RequirementResult("bhl_counterexample", passed, 1, 0.0, None, details)


def check_requirements(trials: int, seed: int, dim: int = 2) -> RequirementReport:
    """Randomized property suites for the requirements on a q-rms error.

    Every suite draws from its own seed stream so adding or resizing one
    does not change the others.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if dim < 1:
        raise ValueError("dim must be >= 1")
    results = [
        _check_definability(trials, dim, _stream(seed, 0)),
        _check_correspondence(trials, dim, _stream(seed, 1)),
        _check_soundness(trials, dim, _stream(seed, 2)),
        _check_completeness(trials, dim, _stream(seed, 3)),
        _check_dominating(trials, dim, _stream(seed, 4)),
        _check_conservation(trials, dim, _stream(seed, 5)),
        _check_bhl_example(),
    ]
    return RequirementReport(seed, dim, results)
