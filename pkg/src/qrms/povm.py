"""Finite-outcome POVMs with real outcome values.

A :class:`Povm` pairs each outcome value ``x`` with a positive effect
``E(x)``; the effects resolve the identity. The moment operators
``M = sum x E(x)`` and ``M2 = sum x**2 E(x)`` are what the noise-operator
error depends on, and :func:`naimark_dilate` realizes any POVM as a sharp
meter reading on system (x) ancilla.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .linalg import (
    HERMITIAN_TOL,
    IDENTITY2,
    PSD_CLAMP,
    SIGMA_X,
    SIGMA_Z,
    as_observable,
    as_state,
    expectation,
    matrix_sqrt_psd,
    random_state,
    random_unitary,
    spectral_decompose,
)

COMPLETENESS_TOL = 1e-10
OUTCOME_GAP = 1e-9
IDEMPOTENT_TOL = 1e-9
PROBABILITY_TOL = 1e-10


class InvalidPovmError(ValueError):
    """Raised when effects are not positive or do not resolve the identity."""


@dataclass(frozen=True, eq=False)
class Povm:
    """Outcome values with their effects.

    Construction validates the invariants: every effect is Hermitian with
    eigenvalues >= -1e-10, the effects sum to the identity within 1e-10 and
    outcome values are pairwise separated by more than 1e-9.
    """

    values: tuple[float, ...]
    effects: tuple[np.ndarray, ...]

    def __post_init__(self):
        values = tuple(float(x) for x in self.values)
        effects = tuple(np.array(e, dtype=complex) for e in self.effects)
        if not values or len(values) != len(effects):
            raise InvalidPovmError("need one effect per outcome value and at least one outcome")
        dim = effects[0].shape[0]
        for x, e in zip(values, effects):
            if e.shape != (dim, dim):
                raise InvalidPovmError(f"effect for outcome {x} has shape {e.shape}, expected {(dim, dim)}")
            try:
                as_observable(e, HERMITIAN_TOL)
            except ValueError as exc:
                raise InvalidPovmError(f"effect for outcome {x}: {exc}") from None
            low = spectral_decompose(e).eigenvalues[-1]
            if low < PSD_CLAMP:
                raise InvalidPovmError(f"effect for outcome {x} has negative eigenvalue {low:.3e}")
            e.setflags(write=False)
        total = sum(effects)
        err = float(np.max(np.abs(total - np.eye(dim))))
        if err > COMPLETENESS_TOL:
            raise InvalidPovmError(f"effects do not sum to the identity (max deviation {err:.3e})")
        ordered = sorted(values)
        for lo, hi in zip(ordered, ordered[1:]):
            if hi - lo <= OUTCOME_GAP:
                raise InvalidPovmError(f"outcome values {lo} and {hi} are not distinct")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "effects", effects)

    @classmethod
    def from_pairs(cls, pairs) -> "Povm":
        pairs = list(pairs)
        return cls(tuple(x for x, _ in pairs), tuple(e for _, e in pairs))

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[tuple[float, np.ndarray]]:
        return iter(zip(self.values, self.effects))

    def effect(self, value: float, tol: float = OUTCOME_GAP) -> np.ndarray:
        for x, e in self:
            if abs(x - value) <= tol:
                return e
        raise KeyError(value)

    def __repr__(self) -> str:
        vals = ", ".join(f"{x:.6g}" for x in self.values)
        return f"Povm(dim={self.dim}, values=({vals}))"


@dataclass(frozen=True, eq=False)
class Dilation:
    """Isometry ``V: H -> H (x) K`` and a sharp meter on ``H (x) K``.

    The composite index is ``i * ancilla_dim + x`` (system first).
    """

    ancilla_dim: int
    isometry: np.ndarray
    meter: np.ndarray
    values: tuple[float, ...]

    @property
    def dim(self) -> int:
        return self.isometry.shape[1]

    def meter_projector(self, index: int) -> np.ndarray:
        ket = np.zeros(self.ancilla_dim)
        ket[index] = 1.0
        return np.kron(np.eye(self.dim), np.outer(ket, ket))

    def pulled_back_effect(self, index: int) -> np.ndarray:
        """``V^dag (1 (x) |x><x|) V``; equals the POVM effect for outcome ``index``."""
        v = self.isometry
        return v.conj().T @ self.meter_projector(index) @ v

    def probabilities(self, psi) -> np.ndarray:
        """Born-rule outcome probabilities of the meter in the dilated state."""
        phi = self.isometry @ as_state(psi)
        amps = phi.reshape(self.dim, self.ancilla_dim)
        return np.sum(np.abs(amps) ** 2, axis=0)

    def noise_norm(self, a, psi) -> float:
        """``|| meter V psi - V A psi ||``, the noise operator applied to ``psi``."""
        a = as_observable(a)
        psi = as_state(psi)
        v = self.isometry
        return float(np.linalg.norm(self.meter @ (v @ psi) - v @ (a @ psi)))


def sharp_from_observable(m) -> Povm:
    """Spectral POVM of a Hermitian operator (descending eigenvalues)."""
    dec = spectral_decompose(as_observable(m))
    return Povm(tuple(dec.eigenvalues), dec.projectors)


def pi1_sharp() -> Povm:
    """Sharp measurement of ``M = sigma_x + sigma_z``; outcomes +-sqrt(2).

    Built from the closed form ``(1 +- sigma_m) / 2`` with
    ``sigma_m = (sigma_x + sigma_z) / sqrt(2)``.
    """
    sigma_m = (SIGMA_X + SIGMA_Z) / math.sqrt(2)
    r2 = math.sqrt(2)
    return Povm((r2, -r2), ((IDENTITY2 + sigma_m) / 2, (IDENTITY2 - sigma_m) / 2))


def pi2_unsharp() -> Povm:
    """Unsharp measurement of ``M = sigma_x + sigma_z``; outcomes +-2."""
    plus = (IDENTITY2 + SIGMA_X / 2 + SIGMA_Z / 2) / 2
    minus = (IDENTITY2 - SIGMA_X / 2 - SIGMA_Z / 2) / 2
    return Povm((2.0, -2.0), (plus, minus))


def moment(p: Povm) -> np.ndarray:
    return sum(x * e for x, e in p)


def second_moment(p: Povm) -> np.ndarray:
    return sum(x * x * e for x, e in p)


def is_projective(p: Povm, tol: float = IDEMPOTENT_TOL) -> bool:
    return all(np.max(np.abs(e @ e - e)) <= tol for e in p.effects)


def outcome_distribution(p: Povm, psi) -> list[tuple[float, float]]:
    """Born probabilities ``<psi|E(x)|psi>`` clamped to [0, 1]."""
    psi = as_state(psi)
    if psi.shape[0] != p.dim:
        raise ValueError(f"dimension mismatch: state dim {psi.shape[0]}, POVM dim {p.dim}")
    out = []
    for x, e in p:
        prob = expectation(psi, e)
        if prob < -PROBABILITY_TOL or prob > 1 + PROBABILITY_TOL:
            raise ValueError(f"probability {prob!r} for outcome {x} is out of range")
        out.append((x, min(max(prob, 0.0), 1.0)))
    return out


def is_accurate(a, p: Povm, psi, tol: float = 1e-9) -> bool:
    """Whether ``p`` reproduces the Born distribution of ``a`` in ``psi``.

    This compares marginal outcome distributions only: for every
    eigenvalue of ``a`` the POVM must assign the same total probability to
    outcomes within 1e-9 of it, and outcomes outside the spectrum of ``a``
    must carry probability below ``tol``.
    """
    a = as_observable(a)
    psi = as_state(psi)
    dec = spectral_decompose(a)
    dist = outcome_distribution(p, psi)
    matched = [False] * len(dist)
    for lam, proj in zip(dec.eigenvalues, dec.projectors):
        target = expectation(psi, proj)
        got = 0.0
        for i, (x, prob) in enumerate(dist):
            if abs(x - lam) <= OUTCOME_GAP:
                got += prob
                matched[i] = True
        if abs(target - got) > tol:
            return False
    return all(prob < tol for (_, prob), hit in zip(dist, matched) if not hit)


def naimark_dilate(p: Povm) -> Dilation:
    """Naimark dilation ``V psi = sum_x (sqrt(E_x) psi) (x) |x>``."""
    k = len(p)
    d = p.dim
    v = np.zeros((d * k, d), dtype=complex)
    for idx, e in enumerate(p.effects):
        ket = np.zeros((k, 1))
        ket[idx, 0] = 1.0
        v += np.kron(matrix_sqrt_psd(e), ket)
    meter = np.kron(np.eye(d), np.diag(np.array(p.values, dtype=complex)))
    return Dilation(ancilla_dim=k, isometry=v, meter=meter, values=p.values)


def dilation_residuals(dil: Dilation, p: Povm) -> dict[str, float]:
    """Max-norm residuals of the isometry and effect-reproduction invariants."""
    v = dil.isometry
    iso = float(np.max(np.abs(v.conj().T @ v - np.eye(dil.dim))))
    eff = max(float(np.max(np.abs(dil.pulled_back_effect(i) - e))) for i, e in enumerate(p.effects))
    return {"isometry": iso, "effects": eff}


def random_povm(
    dim: int,
    n_outcomes: int,
    rng: np.random.Generator,
    values=None,
) -> Povm:
    """Random POVM: Wishart effects normalized as ``S^-1/2 G_i S^-1/2``."""
    gs = []
    for _ in range(n_outcomes):
        x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        gs.append(x @ x.conj().T)
    dec = spectral_decompose(sum(gs))
    s_inv_half = sum(p / math.sqrt(lam) for lam, p in zip(dec.eigenvalues, dec.projectors))
    effects = []
    for g in gs:
        e = s_inv_half @ g @ s_inv_half
        effects.append((e + e.conj().T) / 2)
    # fold the completeness round-off into the last effect
    effects[-1] = effects[-1] + (np.eye(dim) - sum(effects))
    if values is None:
        values = rng.normal(scale=2.0, size=n_outcomes)
    return Povm(tuple(values), tuple(effects))


def random_commuting_instance(dim: int, n_outcomes: int, rng: np.random.Generator):
    """Observable, POVM and state whose effects all commute with the observable.

    Everything is diagonal in a common random basis.
    """
    u = random_unitary(dim, rng)
    a = u @ np.diag(rng.integers(-2, 3, size=dim).astype(float)) @ u.conj().T
    weights = rng.dirichlet(np.ones(n_outcomes), size=dim)  # row i: distribution for basis vector i
    effects = [u @ np.diag(weights[:, j]) @ u.conj().T for j in range(n_outcomes)]
    effects = [(e + e.conj().T) / 2 for e in effects]
    effects[-1] = effects[-1] + (np.eye(dim) - sum(effects))
    values = rng.permutation(np.arange(n_outcomes) - n_outcomes // 2).astype(float) + rng.normal(scale=0.1, size=n_outcomes)
    return (a + a.conj().T) / 2, Povm(tuple(values), tuple(effects)), random_state(dim, rng)
