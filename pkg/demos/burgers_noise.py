"""Burgers shock data at increasing noise levels.

Prints the recovered equation, the selected threshold and the coefficient
error for one seed per level, then writes the loss curve at 50% noise.

    python3 demos/burgers_noise.py [out_dir]
"""

import sys
from dataclasses import replace
from pathlib import Path

from weakpde import pipeline
from weakpde.mstls import write_loss_curve

cfg = pipeline.parse_config(Path(__file__).parent / "configs" / "burgers.cfg")

print(f"{'sigma_nr':>8}  {'lambda_hat':>10}  {'E_inf':>9}  equation")
for level in (0.0, 0.1, 0.25, 0.5, 1.0):
    rep = pipeline.discover(replace(cfg, noise=level, seed=7))
    eq = rep.primary
    print(f"{level:8.2f}  {eq.lambda_hat:10.3g}  {eq.metrics['e_inf']:9.2e}  {eq.equation}")
    if level == 0.5:
        curve = eq.loss_curve

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(parents=True, exist_ok=True)
write_loss_curve(curve, out / "burgers_losscurve_0.5.csv")
print(f"loss curve written to {out / 'burgers_losscurve_0.5.csv'}")
