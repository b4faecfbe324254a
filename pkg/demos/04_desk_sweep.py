"""A small seeded sweep of the chemical PUF, written to demo_out/sweep.

The default sizes finish in under a minute.  Pass --desk for the
K=50, m=20, L=64 scale (a few minutes).  Equivalent command line:

    python -m molpuf sweep --stages 8,16 --seed 42 --out demo_out/sweep
"""

import sys
from dataclasses import replace

from molpuf.harness import ExperimentConfig, sweep

cfg = ExperimentConfig(seed=42, output_dir="demo_out/sweep")
if "--desk" not in sys.argv:
    cfg = replace(cfg, K=10, m=5, L=16)

result = sweep(cfg, stages=(8, 16))
print(result.metrics_csv)
for n, u in result.uniqueness.items():
    r = result.reliability[n]
    print(f"N={n}: reliability {r.reliability:.4f}, uniqueness {u.uniqueness:.4f}, "
          f"inter-chip fit mean {u.fit.mean:.3f} std {u.fit.std:.3f}")
print("CSV, SVG histograms and the manifest are in demo_out/sweep")
