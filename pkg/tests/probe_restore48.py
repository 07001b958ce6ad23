"""Probe the 48 T_c long run under the restore protocol.

Measures everything the band, amplitude, frequency, and retention
criteria need so the acceptance windows can be pinned.
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
import acceptance_lib as lib
from pwsim import diagnostics

cfg = lib.long_config(53.3, 0.5)
run = lib.cached_run(cfg)
dt = lib.traj_dt(run)

for lo, hi in ((5.0, 8.0), (6.0, 10.0), (8.0, 12.0), (10.0, 14.0), (40.0, 48.0)):
    print(f"u_s[{lo},{hi}] = {lib.mean_speed(run, lo, hi):.4f}")

ret = diagnostics.momentum_retention(run)
print(f"retention(last 4) = {ret:.4f}")
bt = run.budgets["t"]
bp = np.hypot(run.budgets["p_particle_x"], run.budgets["p_particle_y"])
p0 = bp[np.searchsorted(bt, 0.75 - 1e-9)]
for lo, hi in ((12.0, 16.0), (20.0, 24.0), (32.0, 36.0), (44.0, 48.0)):
    m = (bt >= lo) & (bt <= hi)
    print(f"  |P_part| mean [{lo},{hi}] / P0 = {np.mean(bp[m]) / p0:.4f}")

spec, t0 = lib.inline_spectrogram(run)
u_pre = lib.mean_speed(run, 6.0, 10.0)
gam_pre = lib.gamma_of(u_pre)
f_pre = diagnostics.dominant_frequency(spec, (4.0 - t0, 11.6 - t0))
print(f"pre-wrap dominant f = {f_pre:.4f}  f*gamma(u_s) = {f_pre * gam_pre:.4f}  (u_s={u_pre:.4f})")

u_tail = lib.mean_speed(run, 40.0, 48.0)
gam_tail = lib.gamma_of(u_tail)
edge = 1.1 * gam_tail * (1.0 + u_tail**2)
band_lo = 0.9 * gam_tail
wrap = 0.75 + cfg.grid.length / 1.5
post = spec.times + t0 >= wrap + 4.0
print(f"post-wrap columns: {int(post.sum())} of {len(spec.times)}  edge = {edge:.3f}")
for name, mat in (("mag", spec.mag), ("mag2", spec.mag**2)):
    cols = mat[:, post]
    above = cols[spec.freqs > edge, :].sum()
    total = cols.sum()
    band = cols[(spec.freqs >= band_lo) & (spec.freqs <= edge), :].sum()
    print(f"band {name}: above/total = {above / total:.4f}  above/band = {above / band:.4f}")

amp, gam_t = lib.tail_amplitude(run)
print(f"tail amplitude = {amp:.5f} lam_c   gamma_tail = {gam_t:.4f}")
print(f"curve 1/(28 g^2.38) = {1.0 / (28.0 * gam_t**2.38):.5f}")

f_tail = diagnostics.dominant_frequency(spec, (40.0 - t0, 48.0 - t0))
print(f"tail dominant f = {f_tail:.4f}  f*gamma_tail = {f_tail * gam_tail:.4f}")
