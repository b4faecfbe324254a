"""The linear additive delay model as a fast statistical reference.

200 PUFs x 200 challenges x 200 noisy conditions, for several stage counts.
Runs in seconds and gives the expected shape of the chemical results.
"""

import numpy as np

from molpuf.delay_model import monte_carlo_metrics
from molpuf.metrics import reliability, uniqueness

rng = np.random.default_rng(2024)
print(" N   P_intra  reliability  P_inter  uniqueness  min inter  max intra")
for n in (8, 16, 32, 64):
    m = monte_carlo_metrics(n, sigma=1.0, sigma_noise=0.05, K=200, m=200, L=200, rng=rng)
    print(f"{n:2d}   {m.p_intra:.4f}   {reliability(m.p_intra):.4f}     {m.p_inter:.4f}   "
          f"{uniqueness(m.p_inter):.4f}     {m.inter.min():.3f}      {m.intra[0].max():.3f}")
