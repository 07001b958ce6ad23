"""Precompute the cached runs the acceptance suite consumes.

Run as `python tests/warm_cache.py`; safe to interrupt and resume, each
run lands in the cache atomically.  Order is chosen so the runs other
checks depend on come first.
"""
from __future__ import annotations

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import acceptance_lib as lib


def main() -> None:
    jobs = []
    jobs.append(("band/wavelength run", lib.long_config(53.3, 0.5)))
    jobs.append(("reference run", lib.reference_config()))
    for u0 in lib.LONG_U0:
        if u0 != 0.5:
            jobs.append((f"long b=53.3 u0={u0}", lib.long_config(53.3, u0)))
    for b in lib.LONG_B:
        if b == 53.3:
            continue
        for u0 in lib.LONG_U0:
            jobs.append((f"long b={b} u0={u0}", lib.long_config(b, u0)))
    for b in lib.RETENTION_B:
        for u0 in sorted(lib.RETENTION_DURATION):
            jobs.append((f"retention b={b} u0={u0}", lib.retention_config(b, u0)))
    jobs.append(("uncertainty run", lib.uncertainty_config()))
    jobs.append(("wake run", lib.wake_config()))
    jobs.append(("packet run", lib.packet_config()))

    t0 = time.time()
    for name, config in jobs:
        tic = time.time()
        lib.cached_run(config)
        print(f"[{time.time() - t0:7.1f}s] {name} ({time.time() - tic:.1f}s)", flush=True)

    tic = time.time()
    lib.cached_relax(lib.relax_config())
    print(f"[{time.time() - t0:7.1f}s] relax ({time.time() - tic:.1f}s)", flush=True)

    tic = time.time()
    lib.cached_run(lib.refined_config())
    print(f"[{time.time() - t0:7.1f}s] refined run ({time.time() - tic:.1f}s)", flush=True)
    print("cache warm")


if __name__ == "__main__":
    main()
