"""A measurement with zero noise-operator error that still gets the answer wrong.

Run with ``python3 demos/01_counterexample.py``.
"""

# %%
import math

import numpy as np

from qrms.counterexample import MOMENT_M, OBSERVABLE_A, PSI0
from qrms.errors import eps_bar, eps_no
from qrms.linalg import spectral_decompose
from qrms.povm import is_accurate, outcome_distribution, pi1_sharp, pi2_unsharp

np.set_printoptions(precision=4, suppress=True)

# %% A = 1 + sigma_x has eigenvalues 2 and 0; M = sigma_x + sigma_z has +-sqrt(2)
print("spec A:", spectral_decompose(OBSERVABLE_A).eigenvalues)
print("spec M:", spectral_decompose(MOMENT_M).eigenvalues)

# both send |+z> to the same vector
print("A|+z> =", (OBSERVABLE_A @ PSI0).real, "  M|+z> =", (MOMENT_M @ PSI0).real)

# %% so the noise operator annihilates |+z> for the sharp measurement of M
p1 = pi1_sharp()
p2 = pi2_unsharp()
print(f"eps_no(Pi1) = {eps_no(OBSERVABLE_A, p1, PSI0):.3e}")
print(f"eps_no(Pi2) = {eps_no(OBSERVABLE_A, p2, PSI0):.12f}  (sqrt 2 = {math.sqrt(2):.12f})")

# %% yet the outcome statistics are not those of A
for x, prob in outcome_distribution(p1, PSI0):
    print(f"  Pi1 reports {x:+.4f} with probability {prob:.4f}")
print("accurate in |+z>?", is_accurate(OBSERVABLE_A, p1, PSI0))

# %% the locally uniform error sees the defect
for name, p in (("Pi1", p1), ("Pi2", p2)):
    value, where = eps_bar(OBSERVABLE_A, p, PSI0)
    print(f"eps_bar({name}) = {value:.9f} at alpha = {where:.9f}")
