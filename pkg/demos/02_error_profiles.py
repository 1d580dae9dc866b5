"""Error profiles along the orbit generated by A.

Prints an ASCII sketch of both profiles and checks them against their
closed forms ``2|sin(a/2)|`` and ``sqrt(4 - 2 cos a)``.
"""

# %%
import math

import numpy as np

from qrms.counterexample import OBSERVABLE_A, PSI0, sharp_profile, unsharp_profile
from qrms.errors import error_profile, profile, profile_period
from qrms.povm import pi1_sharp, pi2_unsharp

alphas = np.linspace(0, 2 * math.pi, 2048)
e1 = profile(OBSERVABLE_A, pi1_sharp(), PSI0, alphas)
e2 = profile(OBSERVABLE_A, pi2_unsharp(), PSI0, alphas)
print("max deviation from closed forms:", np.max(np.abs(e1 - sharp_profile(alphas))), np.max(np.abs(e2 - unsharp_profile(alphas))))

# %% a rough picture; '*' sharp, 'o' unsharp
width = 50
for a in np.linspace(0, 2 * math.pi, 17):
    s = float(profile(OBSERVABLE_A, pi1_sharp(), PSI0, [a])[0])
    u = float(profile(OBSERVABLE_A, pi2_unsharp(), PSI0, [a])[0])
    row = [" "] * (width + 1)
    row[int(round(u / 2.5 * width))] = "o"
    row[int(round(s / 2.5 * width))] = "*"
    print(f"{a:5.2f} |{''.join(row)}")

# %% the orbit closes after 2 pi, so the supremum is a maximum over one period
print("period:", profile_period(OBSERVABLE_A))
prof = error_profile(OBSERVABLE_A, pi2_unsharp(), PSI0)
print(f"eps_bar = {prof.eps_bar:.9f} at {prof.argmax_alpha:.9f}; sqrt 6 = {math.sqrt(6):.9f}")

# %% incommensurate spectra never close the orbit; a long finite horizon is used instead
print("diag(0, 1, sqrt 2):", profile_period(np.diag([0.0, 1.0, math.sqrt(2)])))
