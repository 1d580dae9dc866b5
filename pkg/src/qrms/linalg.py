"""Dense complex linear algebra for small Hermitian problems.

Observables are plain ``(d, d)`` complex arrays and pure states are plain
``(d,)`` complex arrays; the helpers here validate them on the way in.
Eigen-decompositions use a cyclic complex Jacobi sweep so results do not
depend on which LAPACK build numpy was linked against.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12
DEGENERACY_GAP = 1e-9
PSD_CLAMP = -1e-10
PSD_REJECT = -1e-8
# eigenvalues this close to zero are treated as exact zeros by matrix_sqrt_psd
ZERO_EIGENVALUE = 1e-12

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

KET_PLUS_Z = np.array([1, 0], dtype=complex)
KET_MINUS_Z = np.array([0, 1], dtype=complex)
KET_PLUS_X = np.array([1, 1], dtype=complex) / math.sqrt(2)
KET_MINUS_X = np.array([1, -1], dtype=complex) / math.sqrt(2)

for _arr in (IDENTITY2, SIGMA_X, SIGMA_Y, SIGMA_Z, KET_PLUS_Z, KET_MINUS_Z, KET_PLUS_X, KET_MINUS_X):
    _arr.setflags(write=False)


class SpectralDecomposition(NamedTuple):
    """Distinct eigenvalues (descending) with their orthogonal projectors."""

    eigenvalues: np.ndarray
    projectors: tuple[np.ndarray, ...]

    def reconstruct(self) -> np.ndarray:
        return sum(lam * p for lam, p in zip(self.eigenvalues, self.projectors))


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a square, finite complex matrix."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    arr = as_matrix(m)
    return bool(np.max(np.abs(arr - arr.conj().T)) <= tol)


def as_observable(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate a Hermitian observable; raises ``ValueError`` otherwise."""
    arr = as_matrix(m)
    err = np.max(np.abs(arr - arr.conj().T))
    if err > tol:
        raise ValueError(f"operator is not Hermitian (max |X - X^dag| = {err:.3e})")
    return arr


def as_state(v, tol: float = NORM_TOL) -> np.ndarray:
    """Validate a normalized ket."""
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a 1-d state vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("state has non-finite amplitudes")
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"state is not normalized (norm = {norm!r})")
    return arr


def normalize(v) -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    return arr / np.linalg.norm(arr)


def _check_dims(psi: np.ndarray, op: np.ndarray) -> None:
    if psi.shape[0] != op.shape[0]:
        raise ValueError(f"dimension mismatch: state has dim {psi.shape[0]}, operator has dim {op.shape[0]}")


def jacobi_eigh(h, max_sweeps: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a Hermitian matrix by cyclic Jacobi.

    Parameters
    ----------
    h : array_like, shape (n, n)
        Hermitian matrix.
    max_sweeps : int
        Upper bound on full (p, q) sweeps.

    Returns
    -------
    eigenvalues : ndarray, shape (n,)
        Real eigenvalues in the order the sweep leaves them on the diagonal.
    eigenvectors : ndarray, shape (n, n)
        Unitary matrix whose columns are the eigenvectors.
    """
    a = np.array(as_observable(h), dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    eps = np.finfo(float).eps

    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= eps * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = 0.5 * math.atan2(2.0 * mag, app - aqq)
                if theta > math.pi / 4:
                    theta -= math.pi / 2
                c = math.cos(theta)
                s = math.sin(theta)
                # phase rotation on column q makes a[p, q] real, then a real Givens rotation zeroes it
                j = np.eye(n, dtype=complex)
                j[p, p] = c
                j[p, q] = -s
                j[q, p] = s / phase
                j[q, q] = c / phase
                a = j.conj().T @ a @ j
                a[p, q] = 0.0
                a[q, p] = 0.0
                v = v @ j
    else:
        raise RuntimeError("Jacobi iteration did not converge")

    return np.real(np.diag(a)).copy(), v


def spectral_decompose(obs, gap: float = DEGENERACY_GAP) -> SpectralDecomposition:
    """Spectral decomposition with near-degenerate eigenvalues merged.

    Eigenvalues are sorted in descending order (stable, so ties keep the
    order the sweep produced). Neighbours closer than ``gap`` share one
    projector, labelled by their mean.
    """
    lam, vecs = jacobi_eigh(obs)
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    vecs = vecs[:, order]

    groups: list[list[int]] = [[0]]
    for i in range(1, lam.size):
        if lam[groups[-1][-1]] - lam[i] < gap:
            groups[-1].append(i)
        else:
            groups.append([i])

    eigenvalues = np.array([lam[g].mean() for g in groups])
    projectors = []
    for g in groups:
        block = vecs[:, g]
        projectors.append(block @ block.conj().T)
    return SpectralDecomposition(eigenvalues, tuple(projectors))


def apply_function(obs, func) -> np.ndarray:
    """Return ``func(obs)`` through the spectral decomposition."""
    dec = spectral_decompose(obs)
    return sum(func(lam) * p for lam, p in zip(dec.eigenvalues, dec.projectors))


def evolve(psi, gen, angle: float) -> np.ndarray:
    """Apply ``exp(i * angle * gen / 2)`` to ``psi``.

    For ``gen = SIGMA_X`` this is a rotation of the Bloch vector about the
    x-axis by ``angle``: ``|+z>`` goes to Bloch vector ``(0, sin a, cos a)``.
    """
    psi = as_state(psi)
    gen = as_observable(gen)
    _check_dims(psi, gen)
    if angle == 0.0:
        return psi.copy()
    dec = spectral_decompose(gen)
    out = np.zeros_like(psi)
    for lam, proj in zip(dec.eigenvalues, dec.projectors):
        out = out + np.exp(0.5j * angle * lam) * (proj @ psi)
    return out


def evolve_many(psi, gen, angles) -> np.ndarray:
    """Vectorized :func:`evolve` over an array of angles.

    Returns an array of shape ``(d, len(angles))`` whose columns are the
    evolved states.
    """
    psi = as_state(psi)
    gen = as_observable(gen)
    _check_dims(psi, gen)
    angles = np.asarray(angles, dtype=float)
    dec = spectral_decompose(gen)
    out = np.zeros((psi.shape[0], angles.size), dtype=complex)
    for lam, proj in zip(dec.eigenvalues, dec.projectors):
        out += np.outer(proj @ psi, np.exp(0.5j * angles * lam))
    out[:, angles == 0.0] = psi[:, None]
    return out


def expectation(psi, obs) -> float:
    """``<psi|obs|psi>`` as a real number; the imaginary residue must be < 1e-12."""
    psi = np.asarray(psi, dtype=complex)
    obs = as_matrix(obs)
    _check_dims(psi, obs)
    val = np.vdot(psi, obs @ psi)
    if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}; operator not Hermitian?")
    return float(val.real)


def matrix_sqrt_psd(m) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Eigenvalues down to -1e-8 are treated as round-off and clamped to zero;
    anything more negative raises ``ValueError``.
    """
    dec = spectral_decompose(as_observable(m))
    if dec.eigenvalues[-1] < PSD_REJECT:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {dec.eigenvalues[-1]:.3e})")
    out = np.zeros_like(dec.projectors[0])
    for lam, proj in zip(dec.eigenvalues, dec.projectors):
        if lam > ZERO_EIGENVALUE:
            out = out + math.sqrt(lam) * proj
    return out


def fidelity(phi, psi) -> float:
    """Phase-insensitive overlap ``|<phi|psi>|``."""
    return float(abs(np.vdot(phi, psi)))


def bloch_vector(psi) -> np.ndarray:
    psi = as_state(psi)
    if psi.shape[0] != 2:
        raise ValueError("Bloch vector is defined for qubits only")
    return np.array([expectation(psi, s) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)])


def projector(v) -> np.ndarray:
    """Rank-one projector onto the (normalized) vector ``v``."""
    v = normalize(v)
    return np.outer(v, v.conj())


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (x + x.conj().T) / 2


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
