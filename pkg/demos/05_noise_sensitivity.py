"""How strongly does environmental noise flip responses?

Per-MUX rate offsets N(0, sigma_s^2) are compared against the N(16, 1)
manufacturing spread.  The delay model predicts the intra-chip distance
as a function of sigma_s/sigma; a short chemical run checks one point.
A reliability of 0.999 needs sigma_s of roughly 0.002 on this scale.
"""

from dataclasses import replace

import numpy as np

from molpuf.delay_model import monte_carlo_metrics
from molpuf.harness import ExperimentConfig, run_reliability_experiment

rng = np.random.default_rng(7)
print("sigma_s   delay-model reliability (N=16)")
for s in (0.002, 0.01, 0.02, 0.05, 0.1):
    m = monte_carlo_metrics(16, 1.0, s, K=100, m=50, L=200, rng=rng)
    print(f"{s:7.3f}   {1 - m.p_intra:.4f}")

cfg = ExperimentConfig(n_stages=16, m=6, L=32, seed=1)
for s in (0.01, 0.05):
    r = run_reliability_experiment(replace(cfg, sigma_s=s)).reliability[16]
    print(f"chemical PUF, sigma_s={s}: reliability {r.reliability:.4f} "
          f"(m={cfg.m}, L={cfg.L})")
