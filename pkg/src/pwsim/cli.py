"""Command-line entry points: run, sweep, analyze, predict, relax.

Exit codes: 0 success, 1 runtime fault (missing artifacts, blow-up,
non-convergence), 2 configuration errors (unknown keys, malformed
values, stability-bound violations).
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import diagnostics, io_formats, theory
from .field_core import FieldBlowupError, FieldState
from .particle_core import ParticleState
from .simulation import (
    SOURCE_CALIBRATION,
    ConfigError,
    RunOutput,
    SimConfig,
    run,
    relax_static,
    steady_packet_state,
    sweep,
)

TRAJ_FILE = "trajectory.dat"
BUDGET_FILE = "budgets.dat"
ECHO_FILE = "config_echo.cfg"
FINAL_FIELD_FILE = "final_field.pwf"
STATE_FILE = "state.json"
REPORT_FILE = "report.txt"
SPECTROGRAM_FILE = "spectrogram.pws"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pwsim",
        description="pseudo-spectral wave-particle simulator and analysis tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_config: bool) -> None:
        p.add_argument("--config", required=needs_config, help="config file path")
        p.add_argument("--out", help="output directory")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config key (repeatable; a comma list forms a sweep axis)",
        )

    common(sub.add_parser("run", help="simulate one config"), True)
    common(sub.add_parser("sweep", help="simulate a config over an axis"), True)
    common(sub.add_parser("relax", help="relax the static field of a held particle"), True)
    common(sub.add_parser("analyze", help="analyze a finished run directory"), False)
    pred = sub.add_parser("predict", help="closed-form predictions, no simulation")
    pred.add_argument("--b", type=float, default=53.3, help="coupling")
    pred.add_argument("--u", type=float, default=0.0, help="current speed")
    pred.add_argument("--u0", type=float, default=0.0, help="speed before the kick")
    pred.add_argument("--v", type=float, default=None, help="relative speed (default from u, u0)")
    pred.add_argument("--m", type=float, default=1.0, help="field mass")
    pred.add_argument("--out", help="output directory for the report")
    return parser


def _out_dir(args, config: SimConfig | None = None) -> Path:
    chosen = args.out or (config.out_dir if config is not None else None)
    if not chosen:
        raise ConfigError("no output directory: pass --out or set output.dir")
    path = Path(chosen)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_run_artifacts(out_dir: Path, output: RunOutput) -> None:
    io_formats.write_config_echo(out_dir / ECHO_FILE, output.config)
    io_formats.write_trajectory(out_dir / TRAJ_FILE, output)
    io_formats.write_budgets(out_dir / BUDGET_FILE, output)
    index_lines = []
    for i, (t, field, particle) in enumerate(output.snapshots):
        name = f"snapshot_{i:04d}.pwf"
        io_formats.write_field_snapshot(out_dir / name, field)
        index_lines.append(
            f"{t:.10g} {name} {particle.position[0]:.17g} {particle.position[1]:.17g} "
            f"{particle.reduced_momentum[0]:.17g} {particle.reduced_momentum[1]:.17g}"
        )
    (out_dir / "snapshot_index.txt").write_text(
        "# t file x y g_x g_y\n" + "\n".join(index_lines) + "\n"
    )
    io_formats.write_field_snapshot(out_dir / FINAL_FIELD_FILE, output.final_field)
    io_formats.write_run_state(out_dir / STATE_FILE, output)


def _summary(output: RunOutput) -> str:
    speed = float(np.linalg.norm(output.final_particle.velocity))
    bu = output.budgets
    drift = 0.0
    if len(bu["t"]) > 1:
        t_re = diagnostics.post_ramp_time(output)
        i0 = min(int(np.searchsorted(bu["t"], t_re - 1e-9)), len(bu["t"]) - 1)
        px = bu["p_field_x"] + bu["p_particle_x"]
        py = bu["p_field_y"] + bu["p_particle_y"]
        drift = float(
            np.max(np.hypot(px[i0:] - px[i0], py[i0:] - py[i0]))
        )
    return (
        f"{output.config.duration:g} periods in {output.wall_time:.1f} s, "
        f"final speed {speed:.4f}, post-ramp momentum drift {drift:.3g}"
    )


def cmd_run(args) -> int:
    config = io_formats.parse_config(args.config, args.overrides)
    out_dir = _out_dir(args, config)
    output = run(config)
    _write_run_artifacts(out_dir, output)
    print(f"run: {_summary(output)} -> {out_dir}")
    return 0


def _axis_values(overrides) -> tuple[list[str], str | None, list[str]]:
    scalar, axis_key, axis_values = [], None, []
    for item in overrides:
        key = item.split("=", 1)[0].strip() if "=" in item else item
        value = item.split("=", 1)[1] if "=" in item else ""
        if "," in value:
            if axis_key is not None:
                raise ConfigError("only one --set may carry a comma-separated axis")
            axis_key = key
            axis_values = [part.strip() for part in value.split(",") if part.strip()]
        else:
            scalar.append(item)
    return scalar, axis_key, axis_values


def cmd_sweep(args) -> int:
    scalar, axis_key, axis_values = _axis_values(args.overrides)
    if axis_key is None:
        raise ConfigError("sweep needs one --set key=v1,v2,... axis")
    out_dir = _out_dir(args)
    # a bad axis value is a per-run failure, not a reason to abort the batch
    prepared: list[SimConfig | Exception] = []
    for value in axis_values:
        try:
            prepared.append(
                io_formats.parse_config(args.config, scalar + [f"{axis_key}={value}"])
            )
        except ConfigError as exc:
            prepared.append(exc)
    results = iter(sweep([c for c in prepared if not isinstance(c, Exception)]))
    lines = [f"# sweep axis: {axis_key}"]
    failures = 0
    for value, item in zip(axis_values, prepared):
        result = item if isinstance(item, Exception) else next(results)
        sub = out_dir / f"{axis_key.split('.')[-1]}_{value}"
        if isinstance(result, Exception):
            failures += 1
            lines.append(f"{value} FAILED {result}")
            print(f"sweep {axis_key}={value}: FAILED: {result}", file=sys.stderr)
            continue
        sub.mkdir(parents=True, exist_ok=True)
        _write_run_artifacts(sub, result)
        lines.append(f"{value} {sub.name}")
        print(f"sweep {axis_key}={value}: {_summary(result)}")
    (out_dir / "sweep_index.txt").write_text("\n".join(lines) + "\n")
    return 1 if failures else 0


def cmd_relax(args) -> int:
    config = io_formats.parse_config(args.config, args.overrides)
    out_dir = _out_dir(args, config)
    state = relax_static(config)
    io_formats.write_config_echo(out_dir / ECHO_FILE, config)
    io_formats.write_field_snapshot(out_dir / "relaxed_field.pwf", state)
    io_formats.emit_heatmap(state, out_dir / "relaxed_field.pgm")
    peak = float(np.max(np.abs(state.phi)))
    print(
        f"relax: converged after {state.time:g} periods, peak phi {peak:.6g} "
        f"-> {out_dir}"
    )
    return 0


def _load_run(run_dir: Path) -> tuple[RunOutput, FieldState, float]:
    """Rebuild enough of a RunOutput from a run directory for analysis;
    returns the output, the latest field snapshot, and its time."""
    for name in (ECHO_FILE, TRAJ_FILE, BUDGET_FILE):
        if not (run_dir / name).exists():
            raise FileNotFoundError(f"missing artifact: {run_dir / name}")
    config = io_formats.parse_config(run_dir / ECHO_FILE)
    trajectory = io_formats.read_trajectory(run_dir / TRAJ_FILE)
    budgets = io_formats.read_budgets(run_dir / BUDGET_FILE)
    candidates = sorted(run_dir.glob("snapshot_*.pwf")) + [run_dir / FINAL_FIELD_FILE]
    candidates = [p for p in candidates if p.exists()]
    if not candidates:
        raise FileNotFoundError(
            f"missing artifact: no field snapshot (*.pwf) in {run_dir}"
        )
    field = io_formats.read_field_snapshot(candidates[-1])
    final_particle = ParticleState(
        np.array([trajectory["x"][-1], trajectory["y"][-1]]),
        np.array([trajectory["g_x"][-1], trajectory["g_y"][-1]]),
    )
    output = RunOutput(
        config=config,
        grid=config.grid,
        trajectory=trajectory,
        budgets=budgets,
        snapshots=[],
        final_field=field,
        final_particle=final_particle,
        final_step=int(round(trajectory["t"][-1] / config.dt)),
        exchange_total=float(budgets["exchange_cum"][-1]),
    )
    return output, field, field.time


def _particle_at(trajectory, t: float) -> ParticleState:
    i = int(np.argmin(np.abs(trajectory["t"] - t)))
    return ParticleState(
        np.array([trajectory["x"][i], trajectory["y"][i]]),
        np.array([trajectory["g_x"][i], trajectory["g_y"][i]]),
    )


def cmd_analyze(args) -> int:
    if not args.out:
        raise ConfigError("analyze needs --out RUN_DIR")
    run_dir = Path(args.out)
    output, field, field_t = _load_run(run_dir)
    config = output.config
    tr = output.trajectory
    dt_tr = config.dt * config.traj_stride
    t_re = diagnostics.post_ramp_time(output)
    sel = tr["t"] >= t_re - 1e-9

    report: dict[str, object] = {
        "duration": config.duration,
        "post_ramp_start": t_re,
        "final_speed": float(np.linalg.norm(output.final_particle.velocity)),
    }

    series = diagnostics.budgets(output)
    post = series.times >= t_re - 1e-9
    p_tot = series.p_part + series.p_field
    if np.any(post):
        i0 = int(np.argmax(post))
        report["momentum_drift"] = float(
            np.max(np.linalg.norm(p_tot[post] - p_tot[i0], axis=1))
        )
        resid = diagnostics.energy_residual(
            series.window(series.times[i0], series.times[-1])
        )
        report["energy_residual_max"] = float(np.max(np.abs(resid)))
        report["angular_momentum_drift"] = float(
            np.max(np.abs(series.l_z[post] - series.l_z[i0]))
        )

    window = 8.0
    x_post = tr["x"][sel]
    if len(x_post) * dt_tr > window:
        zit = diagnostics.highpass(
            np.column_stack([x_post, tr["y"][sel]]), dt_tr
        )
        spec = diagnostics.spectrogram(zit[:, 0], dt_tr, window_periods=window)
        io_formats.write_spectrogram(run_dir / SPECTROGRAM_FILE, spec)
        tail = max(1, min(len(spec.times), int(round(10.0 / (spec.hop * dt_tr)))))
        report["dominant_frequency"] = diagnostics.dominant_frequency(spec)
        report["oscillation_amplitude"] = diagnostics.oscillation_amplitude(spec, tail)
        if len(zit) * dt_tr >= 10.0:
            zit_g = diagnostics.highpass(
                np.column_stack([tr["g_x"][sel], tr["g_y"][sel]]), dt_tr
            )
            m_eff = theory.effective_mass(config.params.b, config.grid.m)
            prods = diagnostics.uncertainty_product(
                zit * config.grid.lam_c, zit_g, m_eff, dt_tr
            )
            report["uncertainty_product_x"] = float(prods[0])
            report["uncertainty_product_y"] = float(prods[1])
    try:
        report["momentum_retention"] = diagnostics.momentum_retention(output)
    except (ValueError, RuntimeError) as exc:
        report["momentum_retention"] = "nan"
        report["momentum_retention_note"] = str(exc)

    particle = _particle_at(tr, field_t)
    g_mag = float(np.linalg.norm(particle.reduced_momentum))
    if g_mag > 1e-3:
        beff = SOURCE_CALIBRATION * config.params.b
        reference = steady_packet_state(
            config.grid, particle, beff, config.params.source_variance
        )
        report["local_wavenumber"] = diagnostics.local_wavenumber(
            field,
            particle.position,
            particle.velocity,
            reference=reference,
        )
        report["local_wavenumber_prediction"] = config.grid.m * g_mag

    io_formats.write_report(run_dir / REPORT_FILE, report)
    drift = report.get("momentum_drift", 0.0)
    print(
        f"analyze: {config.duration:g} periods, final speed "
        f"{report['final_speed']:.4f}, budget drift {drift:.3g} -> {run_dir / REPORT_FILE}"
    )
    return 0


def cmd_predict(args) -> int:
    try:
        theory.TheoryInputs(m=args.m, b=args.b, u0=args.u0, v=args.v or 0.0)
        u = args.u
        if abs(u) >= 1.0:
            raise ValueError("speed u must be sub-luminal")
        gamma = 1.0 / math.sqrt(1.0 - u * u)
        g = gamma * u
        v = args.v
        if v is None:
            v = (u - args.u0) / (1.0 - u * args.u0)
        front = theory.wavefront(args.u0, v, 1.0)
        report: dict[str, object] = {
            "lambda_dB": theory.de_broglie_wavelength([g, 0.0], args.m),
            "omega_zitter": theory.zitter_frequency(u),
            "omega_max": theory.max_frequency(u),
            "wavefront_center_speed": front.u_source,
            "wavefront_expansion_speed": front.u_expansion,
            "wavefront_axis_ratio": front.semi_inline / front.semi_transverse
            if front.semi_transverse > 0.0
            else 1.0,
            "delta_m_over_m": theory.virtual_mass(args.b),
        }
        try:
            report["uncertainty_bound"] = theory.uncertainty_bound(args.b, gamma)
        except ValueError:
            report["uncertainty_bound"] = "nan"
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for key, value in report.items():
        print(f"{key} = {value}")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        io_formats.write_report(out_dir / REPORT_FILE, report)
    return 0


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "relax": cmd_relax,
    "analyze": cmd_analyze,
    "predict": cmd_predict,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, FieldBlowupError, RuntimeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
