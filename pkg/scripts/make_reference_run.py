#!/usr/bin/env python3
"""Regenerate the shipped reference run under figures/data/reference-run.

One moderate kick run plus a small u0 sweep, analyzed in place; sweep
subdirectories keep only their config echo and report so the checkout
stays light. Rerun after any change to the on-disk formats.
"""
from __future__ import annotations

import shutil
import subprocess
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
DATA = REPO / "figures" / "data" / "reference-run"

BASE = """\
grid.n = 128
grid.length = 16.0
physics.m = 1.0
physics.b = 53.3
time.dt = 0.008
time.duration = {duration}
scenario.kind = rest-kick
scenario.u0x = 0.5
scenario.u0y = 0.0
scenario.kick_time = 0.25
scenario.ramp = 0.5
record.traj_stride = 2
record.budget_stride = 4
record.snapshot_every = 0.0
"""


def cli(*args: str) -> None:
    cmd = [sys.executable, "-m", "pwsim.cli", *args]
    print("+", " ".join(cmd[2:]))
    subprocess.run(cmd, check=True, cwd=REPO)


def main() -> None:
    if DATA.exists():
        shutil.rmtree(DATA)
    DATA.mkdir(parents=True)

    cfg = DATA / "reference.cfg"
    cfg.write_text(BASE.format(duration=24.0))
    cli("run", "--config", str(cfg), "--out", str(DATA))
    cli("analyze", "--out", str(DATA))

    sweep_cfg = DATA / "sweep.cfg"
    sweep_cfg.write_text(BASE.format(duration=12.0))
    cli(
        "sweep",
        "--config",
        str(sweep_cfg),
        "--out",
        str(DATA / "sweep"),
        "--set",
        "scenario.u0x=0.2,0.35,0.5,0.65,0.8",
    )

    sys.path.insert(0, str(REPO / "src"))
    from pwsim import diagnostics, io_formats

    points = []
    axis_rows = (DATA / "sweep" / "sweep_index.txt").read_text().splitlines()
    for line in axis_rows:
        parts = line.split()
        if line.startswith("#") or len(parts) != 2:
            continue
        sub = DATA / "sweep" / parts[1]
        cli("analyze", "--out", str(sub))
        report = io_formats.read_report(sub / "report.txt")
        u = float(report["final_speed"])
        points.append((1.0 / (1.0 - u * u) ** 0.5, float(report["oscillation_amplitude"])))
        for heavy in (
            "final_field.pwf",
            "trajectory.dat",
            "budgets.dat",
            "state.json",
            "spectrogram.pws",
        ):
            (sub / heavy).unlink(missing_ok=True)

    fit = diagnostics.fit_amplitude_scaling(points)
    io_formats.write_report(
        DATA / "sweep" / "fits.txt",
        {"b": 53.3, "n_b": fit.n_b, "e_b": fit.e_b, "residual": fit.residual},
    )
    for scratch in (cfg, sweep_cfg):
        scratch.unlink()
    total = sum(p.stat().st_size for p in DATA.rglob("*") if p.is_file())
    print(f"reference run written: {total / 1e6:.2f} MB under {DATA}")


if __name__ == "__main__":
    main()
