"""Any POVM is a sharp meter reading on system (x) ancilla.

The noise operator of the dilated meter, applied to psi, has norm eps_no.
"""

# %%
import numpy as np

from qrms.counterexample import OBSERVABLE_A, PSI0
from qrms.errors import eps_no
from qrms.povm import dilation_residuals, naimark_dilate, outcome_distribution, pi2_unsharp

p = pi2_unsharp()
dil = naimark_dilate(p)
print("isometry shape:", dil.isometry.shape)
print("residuals:", dilation_residuals(dil, p))

# %% meter statistics match the POVM
print("meter probabilities:", dil.probabilities(PSI0))
print("POVM probabilities: ", [prob for _, prob in outcome_distribution(p, PSI0)])

# %% and the noise operator gives the same error
print("dilated noise norm:", dil.noise_norm(OBSERVABLE_A, PSI0))
print("eps_no:            ", eps_no(OBSERVABLE_A, p, PSI0))

# %% over random states
rng = np.random.default_rng(1)
worst = 0.0
for _ in range(1000):
    psi = rng.normal(size=2) + 1j * rng.normal(size=2)
    psi /= np.linalg.norm(psi)
    worst = max(worst, abs(dil.noise_norm(OBSERVABLE_A, psi) - eps_no(OBSERVABLE_A, p, psi)))
print("worst difference over 1000 states:", worst)
