"""On-disk formats: flat key-value configs, text series, key-value
reports, binary field snapshots and spectrograms, and PGM heatmaps.

All files are self-describing: text artifacts carry a commented header
with units and grid metadata, binaries carry magic + version + geometry.
"""
from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np

from .diagnostics import Spectrogram
from .field_core import FieldState, GridSpec
from .particle_core import CouplingParams, ParticleState
from .simulation import (
    BUDGET_COLUMNS,
    TRAJ_COLUMNS,
    ConfigError,
    RestartPoint,
    RunOutput,
    Scenario,
    SimConfig,
)

FIELD_MAGIC = b"PWF1"
SPEC_MAGIC = b"PWS1"
FORMAT_VERSION = 1

# documented config keys: (python type, default); None marks a required key
CONFIG_KEYS: dict[str, tuple[type, object]] = {
    "grid.n": (int, 512),
    "grid.length": (float, 32.0),
    "physics.m": (float, 1.0),
    "physics.b": (float, 53.3),
    "time.dt": (float, 0.002),
    "time.duration": (float, 16.0),
    "scenario.kind": (str, None),
    "scenario.u0x": (float, 0.0),
    "scenario.u0y": (float, 0.0),
    "scenario.kick_time": (float, 0.0),
    "scenario.ramp": (float, 0.5),
    "record.traj_stride": (int, 5),
    "record.budget_stride": (int, 10),
    "record.snapshot_every": (float, 0.0),
    "output.dir": (str, ""),
}


def _convert(key: str, raw: str, where: str) -> object:
    kind = CONFIG_KEYS[key][0]
    if kind is str:
        return raw
    try:
        if kind is int:
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(
            f"malformed value for {key} ({where}): {raw!r} is not {kind.__name__}"
        ) from None


def _parse_pairs(text: str, origin: str) -> dict[str, object]:
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(
                f"malformed line {lineno} in {origin}: expected key = value"
            )
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r} at line {lineno} in {origin}")
        if key in values:
            raise ConfigError(f"duplicate key {key!r} at line {lineno} in {origin}")
        values[key] = _convert(key, raw, f"line {lineno} in {origin}")
    return values


def config_from_values(values: dict[str, object]) -> SimConfig:
    if "scenario.kind" not in values:
        raise ConfigError("missing required key scenario.kind")
    filled = {key: default for key, (_, default) in CONFIG_KEYS.items()}
    filled.update(values)
    kind = filled["scenario.kind"]
    scenario = Scenario(
        kind=kind,
        u0=(filled["scenario.u0x"], filled["scenario.u0y"]),
        kick_time=filled["scenario.kick_time"],
        ramp=filled["scenario.ramp"],
    )
    config = SimConfig(
        grid=GridSpec(
            n=filled["grid.n"], length=filled["grid.length"], m=filled["physics.m"]
        ),
        params=CouplingParams(b=filled["physics.b"]),
        scenario=scenario,
        dt=filled["time.dt"],
        duration=filled["time.duration"],
        traj_stride=filled["record.traj_stride"],
        budget_stride=filled["record.budget_stride"],
        snapshot_every=filled["record.snapshot_every"],
        initial_field="static-profile" if kind == "boosted-kick" else "zero",
        out_dir=filled["output.dir"] or None,
    )
    config.validate()
    return config


def parse_config(path, overrides=()) -> SimConfig:
    """Load a flat key-value config file and apply `key=value` override
    strings on top; every key is checked against the documented set."""
    path = Path(path)
    values = _parse_pairs(path.read_text(), str(path))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"malformed override {item!r}: expected key=value")
        key, raw = (part.strip() for part in item.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r} in override {item!r}")
        values[key] = _convert(key, raw, f"override {item!r}")
    return config_from_values(values)


def config_values(config: SimConfig) -> dict[str, object]:
    sc = config.scenario
    return {
        "grid.n": config.grid.n,
        "grid.length": config.grid.length,
        "physics.m": config.grid.m,
        "physics.b": config.params.b,
        "time.dt": config.dt,
        "time.duration": config.duration,
        "scenario.kind": sc.kind,
        "scenario.u0x": sc.u0[0],
        "scenario.u0y": sc.u0[1],
        "scenario.kick_time": sc.kick_time,
        "scenario.ramp": sc.ramp,
        "record.traj_stride": config.traj_stride,
        "record.budget_stride": config.budget_stride,
        "record.snapshot_every": config.snapshot_every,
        "output.dir": config.out_dir or "",
    }


def write_config_echo(path, config: SimConfig) -> None:
    """Materialize every documented key so the run is reproducible from
    the echo alone."""
    lines = ["# pwsim config echo (all defaults materialized)"]
    for key, value in config_values(config).items():
        lines.append(f"{key} = {value}")
    Path(path).write_text("\n".join(lines) + "\n")


def _series_header(run: RunOutput, columns) -> str:
    cfg = run.config
    return "\n".join(
        [
            f"# grid.n = {cfg.grid.n}, grid.length = {cfg.grid.length} lambda_c, "
            f"physics.m = {cfg.grid.m}, physics.b = {cfg.params.b}",
            f"# time.dt = {cfg.dt} Compton periods, scenario.kind = {cfg.scenario.kind}",
            "# units: t in Compton periods; x, y in lambda_c; g = gamma u; "
            "energies, momenta, gradients natural (hbar = c = 1)",
            "# columns: " + " ".join(columns),
        ]
    )


def write_trajectory(path, run: RunOutput) -> None:
    data = np.column_stack([run.trajectory[name] for name in TRAJ_COLUMNS])
    np.savetxt(
        path,
        data,
        fmt="%.17g",
        header="pwsim trajectory v1\n" + _series_header(run, TRAJ_COLUMNS),
        comments="# ",
    )


def write_budgets(path, run: RunOutput) -> None:
    data = np.column_stack([run.budgets[name] for name in BUDGET_COLUMNS])
    np.savetxt(
        path,
        data,
        fmt="%.17g",
        header="pwsim budgets v1\n" + _series_header(run, BUDGET_COLUMNS),
        comments="# ",
    )


def _read_series(path, magic: str) -> dict[str, np.ndarray]:
    path = Path(path)
    columns: list[str] | None = None
    with path.open() as f:
        first = f.readline()
        if magic not in first:
            raise ValueError(f"{path} is not a {magic} file")
        for line in f:
            if not line.startswith("#"):
                break
            if "columns:" in line:
                columns = line.split("columns:", 1)[1].split()
    if columns is None:
        raise ValueError(f"{path} lacks a columns header")
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != len(columns):
        raise ValueError(f"{path}: {data.shape[1]} columns, header names {len(columns)}")
    return {name: data[:, j] for j, name in enumerate(columns)}


def read_trajectory(path) -> dict[str, np.ndarray]:
    return _read_series(path, "pwsim trajectory v1")


def read_budgets(path) -> dict[str, np.ndarray]:
    return _read_series(path, "pwsim budgets v1")


def write_report(path, entries: dict) -> None:
    lines = ["# pwsim report v1"]
    for key, value in entries.items():
        lines.append(f"{key} = {value}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_report(path) -> dict[str, object]:
    entries: dict[str, object] = {}
    for line in Path(path).read_text().splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, raw = (part.strip() for part in stripped.split("=", 1))
        try:
            entries[key] = float(raw)
        except ValueError:
            entries[key] = raw
    return entries


def write_field_snapshot(path, state: FieldState) -> None:
    """Binary field snapshot: PWF1 magic, version, grid shape, length,
    time, mass, then row-major float64 phi and eta (little-endian)."""
    grid = state.grid
    header = struct.pack(
        "<4sIIIddd",
        FIELD_MAGIC,
        FORMAT_VERSION,
        grid.n,
        grid.n,
        grid.length,
        state.time,
        grid.m,
    )
    with Path(path).open("wb") as f:
        f.write(header)
        state.phi.astype("<f8").tofile(f)
        state.eta.astype("<f8").tofile(f)


def read_field_snapshot(path) -> FieldState:
    path = Path(path)
    with path.open("rb") as f:
        header = f.read(struct.calcsize("<4sIIIddd"))
        if len(header) < struct.calcsize("<4sIIIddd"):
            raise ValueError(f"{path} is truncated")
        magic, version, n_x, n_y, length, time, m = struct.unpack("<4sIIIddd", header)
        if magic != FIELD_MAGIC:
            raise ValueError(f"{path} has magic {magic!r}, expected {FIELD_MAGIC!r}")
        if version != FORMAT_VERSION:
            raise ValueError(f"{path} has unsupported version {version}")
        if n_x != n_y:
            raise ValueError(f"{path} has non-square grid {n_x} x {n_y}")
        count = n_x * n_y
        phi = np.fromfile(f, dtype="<f8", count=count)
        eta = np.fromfile(f, dtype="<f8", count=count)
    if len(phi) != count or len(eta) != count:
        raise ValueError(f"{path} is truncated")
    grid = GridSpec(n=n_x, length=length, m=m)
    return FieldState.from_real(
        grid, phi.reshape(n_x, n_y), eta.reshape(n_x, n_y), time=time
    )


def write_spectrogram(path, spec: Spectrogram) -> None:
    """Binary spectrogram: PWS1 magic, version, shape, window and hop in
    samples, a note string, then float64 freqs, times, magnitudes."""
    note = spec.note.encode()
    header = struct.pack(
        "<4sIIIIII",
        SPEC_MAGIC,
        FORMAT_VERSION,
        len(spec.freqs),
        len(spec.times),
        spec.window,
        spec.hop,
        len(note),
    )
    with Path(path).open("wb") as f:
        f.write(header)
        f.write(note)
        np.asarray(spec.freqs, "<f8").tofile(f)
        np.asarray(spec.times, "<f8").tofile(f)
        np.ascontiguousarray(spec.mag, "<f8").tofile(f)


def read_spectrogram(path) -> Spectrogram:
    path = Path(path)
    fmt = "<4sIIIIII"
    with path.open("rb") as f:
        header = f.read(struct.calcsize(fmt))
        if len(header) < struct.calcsize(fmt):
            raise ValueError(f"{path} is truncated")
        magic, version, n_f, n_t, window, hop, note_len = struct.unpack(fmt, header)
        if magic != SPEC_MAGIC:
            raise ValueError(f"{path} has magic {magic!r}, expected {SPEC_MAGIC!r}")
        if version != FORMAT_VERSION:
            raise ValueError(f"{path} has unsupported version {version}")
        note = f.read(note_len).decode()
        freqs = np.fromfile(f, dtype="<f8", count=n_f)
        times = np.fromfile(f, dtype="<f8", count=n_t)
        mag = np.fromfile(f, dtype="<f8", count=n_f * n_t)
    if len(mag) != n_f * n_t:
        raise ValueError(f"{path} is truncated")
    return Spectrogram(
        window=window,
        hop=hop,
        freqs=freqs,
        times=times,
        mag=mag.reshape(n_f, n_t),
        note=note,
    )


def write_run_state(path, run: RunOutput) -> None:
    """Restart sidecar: particle state, global step, and the running
    exchange integral; the matching field lives in a PWF1 snapshot."""
    payload = {
        "t": run.final_field.time,
        "step": run.final_step,
        "position": list(run.final_particle.position),
        "reduced_momentum": list(run.final_particle.reduced_momentum),
        "exchange": run.exchange_total,
        "kick_bases": [
            None if base is None else list(base) for base in run.kick_bases
        ]
        if run.kick_bases is not None
        else None,
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def read_run_state(path, field_state: FieldState) -> RestartPoint:
    payload = json.loads(Path(path).read_text())
    bases = payload.get("kick_bases")
    return RestartPoint(
        field_state=field_state,
        particle=ParticleState(
            np.array(payload["position"], float),
            np.array(payload["reduced_momentum"], float),
        ),
        step=int(payload["step"]),
        exchange=float(payload["exchange"]),
        kick_bases=None
        if bases is None
        else tuple(None if b is None else (b[0], b[1]) for b in bases),
    )


def emit_heatmap(state: FieldState, path, normalization="linear", c: float = 50.0) -> None:
    """8-bit grayscale portable graymap of phi with a sidecar text file
    recording the value mapping; rows run from high y to low y."""
    if normalization not in ("linear", "arctan"):
        raise ValueError(f"unknown normalization {normalization!r}")
    phi = state.phi
    if normalization == "linear":
        lo, hi = float(np.min(phi)), float(np.max(phi))
        if hi - lo < 1e-300:
            scaled = np.full_like(phi, 0.5)
        else:
            scaled = (phi - lo) / (hi - lo)
        mapping = f"linear: 0 -> {lo:.17g}, 255 -> {hi:.17g}"
    else:
        scaled = (np.arctan(c * phi) / math.pi) + 0.5
        mapping = f"arctan: pixel = 255 * (arctan({c:g} * phi)/pi + 1/2)"
    # transpose so image columns follow x, then flip so +y points up
    pixels = np.round(255.0 * scaled.T[::-1]).astype(np.uint8)
    path = Path(path)
    with path.open("wb") as f:
        f.write(f"P5\n{state.grid.n} {state.grid.n}\n255\n".encode())
        f.write(pixels.tobytes())
    sidecar = path.with_suffix(path.suffix + ".txt")
    sidecar.write_text(
        "\n".join(
            [
                "pwsim heatmap sidecar",
                f"source grid: n = {state.grid.n}, length = {state.grid.length} lambda_c",
                f"time = {state.time} Compton periods",
                f"mapping = {mapping}",
                "orientation: columns follow +x, top row is max y",
            ]
        )
        + "\n"
    )
