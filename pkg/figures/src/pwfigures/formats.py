"""Parsers for the simulator's documented on-disk formats.

Binary layouts (little-endian):
  PWF1 field snapshot: magic "PWF1", u32 version, u32 n_x, u32 n_y,
    f64 length (lambda_c), f64 time (Compton periods), f64 mass, then
    row-major f64 phi and eta arrays.
  PWS1 spectrogram: magic "PWS1", u32 version, u32 n_freq, u32 n_time,
    u32 window, u32 hop, u32 note length, note bytes, then f64 freqs,
    times, and the (n_freq, n_time) magnitude matrix.

Text artifacts: series files open with "# pwsim trajectory v1" or
"# pwsim budgets v1" and carry a "# columns: ..." header; reports and
configs are flat "key = value" lines.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class FormatError(ValueError):
    """A referenced input file is missing pieces or malformed."""


@dataclass
class FieldSnapshot:
    n: int
    length: float
    time: float
    m: float
    phi: np.ndarray
    eta: np.ndarray

    @property
    def lam_c(self) -> float:
        return 2.0 * np.pi / self.m


@dataclass
class SpectrogramData:
    window: int
    hop: int
    freqs: np.ndarray
    times: np.ndarray
    mag: np.ndarray


_FIELD_HEADER = "<4sIIIddd"
_SPEC_HEADER = "<4sIIIIII"


def _require(path: Path) -> Path:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"missing input file: {path}")
    return path


def read_field_snapshot(path) -> FieldSnapshot:
    path = _require(path)
    size = struct.calcsize(_FIELD_HEADER)
    with path.open("rb") as f:
        header = f.read(size)
        if len(header) < size:
            raise FormatError(f"{path}: truncated header")
        magic, version, n_x, n_y, length, time, m = struct.unpack(_FIELD_HEADER, header)
        if magic != b"PWF1":
            raise FormatError(f"{path}: bad magic {magic!r}")
        if version != 1:
            raise FormatError(f"{path}: unsupported version {version}")
        if n_x != n_y:
            raise FormatError(f"{path}: non-square grid {n_x} x {n_y}")
        phi = np.fromfile(f, dtype="<f8", count=n_x * n_y)
        eta = np.fromfile(f, dtype="<f8", count=n_x * n_y)
    if len(phi) != n_x * n_y or len(eta) != n_x * n_y:
        raise FormatError(f"{path}: truncated field data")
    return FieldSnapshot(
        n=n_x,
        length=length,
        time=time,
        m=m,
        phi=phi.reshape(n_x, n_y),
        eta=eta.reshape(n_x, n_y),
    )


def read_spectrogram(path) -> SpectrogramData:
    path = _require(path)
    size = struct.calcsize(_SPEC_HEADER)
    with path.open("rb") as f:
        header = f.read(size)
        if len(header) < size:
            raise FormatError(f"{path}: truncated header")
        magic, version, n_f, n_t, window, hop, note_len = struct.unpack(
            _SPEC_HEADER, header
        )
        if magic != b"PWS1":
            raise FormatError(f"{path}: bad magic {magic!r}")
        if version != 1:
            raise FormatError(f"{path}: unsupported version {version}")
        f.read(note_len)
        freqs = np.fromfile(f, dtype="<f8", count=n_f)
        times = np.fromfile(f, dtype="<f8", count=n_t)
        mag = np.fromfile(f, dtype="<f8", count=n_f * n_t)
    if len(freqs) != n_f or len(times) != n_t or len(mag) != n_f * n_t:
        raise FormatError(f"{path}: truncated spectrogram data")
    return SpectrogramData(
        window=window, hop=hop, freqs=freqs, times=times, mag=mag.reshape(n_f, n_t)
    )


def read_series(path, expected: str) -> dict[str, np.ndarray]:
    path = _require(path)
    columns: list[str] | None = None
    with path.open() as f:
        first = f.readline()
        if expected not in first:
            raise FormatError(f"{path}: not a '{expected}' series")
        for line in f:
            if not line.startswith("#"):
                break
            if "columns:" in line:
                columns = line.split("columns:", 1)[1].split()
    if columns is None:
        raise FormatError(f"{path}: no columns header")
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != len(columns):
        raise FormatError(
            f"{path}: {data.shape[1]} data columns for {len(columns)} names"
        )
    return {name: data[:, j] for j, name in enumerate(columns)}


def read_trajectory(path) -> dict[str, np.ndarray]:
    return read_series(path, "pwsim trajectory v1")


def read_budgets(path) -> dict[str, np.ndarray]:
    return read_series(path, "pwsim budgets v1")


def _key_values(path: Path) -> dict[str, object]:
    entries: dict[str, object] = {}
    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"{path}: malformed line {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            entries[key] = float(value)
        except ValueError:
            entries[key] = value
    return entries


def read_report(path) -> dict[str, object]:
    return _key_values(_require(path))


def read_config(path) -> dict[str, object]:
    return _key_values(_require(path))


def read_snapshot_index(path) -> list[dict[str, object]]:
    """Rows of (t, file, x, y, g_x, g_y) naming the PWF1 snapshots."""
    path = _require(path)
    rows = []
    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 6:
            raise FormatError(f"{path}: malformed row {line!r}")
        rows.append(
            {
                "t": float(parts[0]),
                "file": parts[1],
                "x": float(parts[2]),
                "y": float(parts[3]),
                "g_x": float(parts[4]),
                "g_y": float(parts[5]),
            }
        )
    return rows


def read_sweep_index(path) -> tuple[str, list[tuple[str, str]]]:
    """The sweep axis key and (value, subdirectory) pairs; failed sweep
    entries are skipped."""
    path = _require(path)
    axis = ""
    entries: list[tuple[str, str]] = []
    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if "sweep axis:" in line:
                axis = line.split("sweep axis:", 1)[1].strip()
            continue
        parts = line.split()
        if len(parts) >= 2 and parts[1] == "FAILED":
            continue
        if len(parts) != 2:
            raise FormatError(f"{path}: malformed row {line!r}")
        entries.append((parts[0], parts[1]))
    if not axis:
        raise FormatError(f"{path}: no sweep axis header")
    return axis, entries
