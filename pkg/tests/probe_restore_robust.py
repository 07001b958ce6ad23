"""Resolution and step robustness of the restore=0.75 kick point."""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
import acceptance_lib as lib
from pwsim import (CouplingParams, GridSpec, Scenario, SimConfig, run)

for n, length, dt in ((256, 16.0, 0.004), (256, 16.0, 0.002), (384, 24.0, 0.004), (512, 16.0, 0.004)):
    cfg = SimConfig(
        grid=GridSpec(n=n, length=length),
        params=CouplingParams(b=53.3),
        scenario=Scenario(
            kind="rest-kick", u0=(0.5, 0.0), kick_time=0.25, ramp=0.5,
            restore=0.75,
        ),
        dt=dt,
        duration=12.0,
        traj_stride=5,
        budget_stride=10,
    )
    out = run(cfg)
    u_a = lib.mean_speed(out, 8.0, 11.0)
    bt = out.budgets["t"]
    bp = np.hypot(out.budgets["p_particle_x"], out.budgets["p_particle_y"])
    p0 = bp[np.searchsorted(bt, 0.75 - 1e-9)]
    m = (bt >= 8.0) & (bt <= 11.0)
    print(f"n={n} L={length} dt={dt}: u_s[8,11]={u_a:.4f} retention={float(np.mean(bp[m])/p0):.4f}")
