"""Race traces for the four reference PUF instances.

Each instance is synthesized from its tabulated rate constants and driven
with its reference challenge.  The final-stage Z_1 traces, the 50 nM
threshold and a zoom on the first crossing are written to demo_out/.
"""

from pathlib import Path

from molpuf.fabric import synthesize_puf
from molpuf.fixtures import PUBLISHED
from molpuf.harness import emit_traces

out = Path("demo_out")
for name, (rates, challenge, expected) in PUBLISHED.items():
    puf = synthesize_puf(len(challenge), rates)
    stem = name.replace(" ", "_").replace("-", "")
    tr = emit_traces(puf, challenge, out_dir=str(out), stem=stem)
    print(f"{name:15s} C={challenge}  t_top={tr.t_top:.4f}s  t_bottom={tr.t_bottom:.4f}s  "
          f"R={tr.bit} (reference {expected})")
print(f"traces written to {out.resolve()}")
