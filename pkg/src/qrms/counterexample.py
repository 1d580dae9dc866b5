"""The two-level example where the noise-operator error vanishes for an inaccurate measurement.

``A = 1 + sigma_x`` is measured in ``|+z>`` by a POVM whose moment operator
is ``M = sigma_x + sigma_z``. Both operators agree on ``|+z>`` but have
disjoint spectra ({2, 0} against {+-sqrt 2}).
"""

import numpy as np

from .linalg import IDENTITY2, KET_PLUS_Z, SIGMA_X, evolve

OBSERVABLE_A = np.array([[1, 1], [1, 1]], dtype=complex)
MOMENT_M = np.array([[1, 1], [1, -1]], dtype=complex)
PSI0 = KET_PLUS_Z
# A with its identity component removed; generates the profile rotation
GENERATOR = OBSERVABLE_A - IDENTITY2

OBSERVABLE_A.setflags(write=False)
MOMENT_M.setflags(write=False)


def psi_alpha(alpha: float) -> np.ndarray:
    """``exp(i alpha sigma_x / 2) |+z>``, the rotated input state."""
    return evolve(PSI0, SIGMA_X, alpha)


def sharp_profile(alpha):
    """Closed form ``2 |sin(alpha / 2)|`` for the sharp measurement."""
    return 2.0 * np.abs(np.sin(np.asarray(alpha) / 2.0))


def unsharp_profile(alpha):
    """Closed form ``sqrt(4 - 2 cos alpha)`` for the unsharp measurement."""
    return np.sqrt(4.0 - 2.0 * np.cos(np.asarray(alpha)))
