#!/usr/bin/env python3
"""Script entry point: --run DIR --kind KIND --out FILE.

Works from a plain checkout; falls back to the in-tree package if
pwfigures is not installed.
"""
from __future__ import annotations

import sys
from pathlib import Path

try:
    from pwfigures.cli import main
except ImportError:
    sys.path.insert(0, str(Path(__file__).resolve().parent / "src"))
    from pwfigures.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
