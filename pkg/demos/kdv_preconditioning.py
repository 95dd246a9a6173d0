"""Effect of amplitude and coordinate rescaling on the KdV system.

KdV data here reaches amplitudes near 1900 on a time step of 1e-5, so
powers of ``u`` and high derivatives span dozens of orders of magnitude.
Rescaling ``u``, ``x`` and ``t`` before assembly brings the Gram matrix
to a workable condition number.

    python3 demos/kdv_preconditioning.py
"""

from dataclasses import replace
from pathlib import Path

from weakpde import pipeline

cfg = pipeline.parse_config(Path(__file__).parent / "configs" / "kdv.cfg")

for precondition in (False, True):
    rep = pipeline.discover(replace(cfg, precondition=precondition))
    tag = "scaled" if precondition else "raw"
    print(f"{tag:>6}: kappa={rep.kappa:9.2e}  TPR={rep.primary.metrics['tpr']:.2f}  {rep.primary.equation}")

sc = pipeline.discover(cfg).scales
print(f"gamma_u={sc['gamma_u']:.3g} gamma_x={sc['gamma_x']:.4g} gamma_t={sc['gamma_t']:.6g}")
