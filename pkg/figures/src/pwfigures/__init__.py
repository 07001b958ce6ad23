"""Publication-style panels from simulation run directories.

Independent of the simulator package: everything is read back through
the documented on-disk formats (PWF1/PWS1 binaries, text series,
key-value reports), and no physics is recomputed.
"""
from __future__ import annotations

from .formats import (
    FieldSnapshot,
    FormatError,
    SpectrogramData,
    read_config,
    read_field_snapshot,
    read_report,
    read_series,
    read_snapshot_index,
    read_spectrogram,
    read_sweep_index,
)
from .render import FigureJob, Style, render

__all__ = [
    "FieldSnapshot",
    "FigureJob",
    "FormatError",
    "SpectrogramData",
    "Style",
    "read_config",
    "read_field_snapshot",
    "read_report",
    "read_series",
    "read_snapshot_index",
    "read_spectrogram",
    "read_sweep_index",
    "render",
]
