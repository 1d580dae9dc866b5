"""The squared error as six expectation values in three preparations.

Only |psi(alpha)>, |psi(alpha + pi)> and |+x> are needed, since
(A - 1) M (A - 1) - A M A - M = -(M A + A M).
"""

# %%
import math

import numpy as np

from qrms.counterexample import OBSERVABLE_A, MOMENT_M
from qrms.errors import eps_no, random_instance
from qrms.povm import pi1_sharp, pi2_unsharp
from qrms.threestate import TERM_NAMES, TERM_SIGNS, assemble, decompose, example_plan, symmetrization_identity_check

print("identity residual:", symmetrization_identity_check(OBSERVABLE_A, MOMENT_M))

# %% term table at a few angles
for p, label in ((pi1_sharp(), "sharp"), (pi2_unsharp(), "unsharp")):
    print(label)
    print("  alpha " + " ".join(f"{n:>9s}" for n in TERM_NAMES) + "   eps")
    for alpha in (0.0, math.pi / 2, math.pi):
        terms = example_plan(alpha, p).exact_terms()
        vals = " ".join(f"{v:9.4f}" for v in terms.as_tuple())
        print(f"  {alpha:5.3f} {vals}   {assemble(terms).epsilon:.6f}")
print("signs:", TERM_SIGNS)

# %% the same bookkeeping works for any observable, POVM and state
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(1000):
    a, p, psi = random_instance(3, rng)
    worst = max(worst, abs(assemble(decompose(a, p, psi)).epsilon - eps_no(a, p, psi)))
print("worst |three-state - eps_no| over 1000 qutrit instances:", worst)
