"""The five panel kinds, each drawn from documented artifacts only."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import formats

KINDS = ("field-view", "spectrogram", "amplitude-fit", "retention", "cloud")


@dataclass
class Style:
    cmap: str = "RdBu_r"
    normalization: float = 50.0  # spectrogram display: arctan(norm * amplitude)
    dpi: int = 150


@dataclass
class FigureJob:
    run_dir: Path
    kind: str
    out: Path
    style: Style = field(default_factory=Style)

    def __post_init__(self) -> None:
        self.run_dir = Path(self.run_dir)
        self.out = Path(self.out)
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; pick from {KINDS}")


def _new_axes():
    fig, ax = plt.subplots(figsize=(6.0, 4.8))
    return fig, ax


def _field_view(job: FigureJob):
    snap = formats.read_field_snapshot(job.run_dir / "final_field.pwf")
    traj = formats.read_trajectory(job.run_dir / "trajectory.dat")
    fig, ax = _new_axes()
    vmax = float(np.max(np.abs(snap.phi))) or 1.0
    im = ax.imshow(
        snap.phi.T,
        origin="lower",
        extent=(0.0, snap.length, 0.0, snap.length),
        cmap=job.style.cmap,
        vmin=-vmax,
        vmax=vmax,
    )
    ax.plot(traj["x"], traj["y"], color="black", linewidth=0.8)
    ax.plot(traj["x"][-1], traj["y"][-1], "ko", markersize=4)
    ax.set_xlabel(r"$x/\lambda_c$")
    ax.set_ylabel(r"$y/\lambda_c$")
    ax.set_title(f"field at t = {snap.time:g} periods")
    fig.colorbar(im, ax=ax, label=r"$\phi$")
    return fig


def _spectrogram(job: FigureJob):
    spec = formats.read_spectrogram(job.run_dir / "spectrogram.pws")
    fig, ax = _new_axes()
    shaded = np.arctan(job.style.normalization * spec.mag)
    mesh = ax.pcolormesh(spec.times, spec.freqs, shaded, cmap="magma", shading="auto")
    ax.set_ylim(0.0, min(2.0, float(spec.freqs[-1])))
    ax.set_xlabel("t [Compton periods]")
    ax.set_ylabel(r"$f/f_c$")
    ax.set_title("in-line oscillation spectrogram")
    fig.colorbar(mesh, ax=ax, label=r"$\arctan(c\,\Delta x/\lambda_c)$")
    return fig


def _sweep_reports(job: FigureJob):
    axis, entries = formats.read_sweep_index(job.run_dir / "sweep" / "sweep_index.txt")
    rows = []
    for value, sub in entries:
        report = formats.read_report(job.run_dir / "sweep" / sub / "report.txt")
        rows.append((float(value), report))
    return axis, rows


def _amplitude_fit(job: FigureJob):
    _, rows = _sweep_reports(job)
    fits = formats.read_report(job.run_dir / "sweep" / "fits.txt")
    gammas, amps = [], []
    for _, report in rows:
        u = float(report["final_speed"])
        gammas.append(1.0 / np.sqrt(1.0 - u * u))
        amps.append(float(report["oscillation_amplitude"]))
    n_b, e_b = float(fits["n_b"]), float(fits["e_b"])
    fig, ax = _new_axes()
    ax.loglog(gammas, amps, "o", label="measured")
    gg = np.geomspace(min(gammas), max(gammas), 120)
    ax.loglog(gg, 1.0 / (n_b * gg**e_b), "-",
              label=rf"$n_b^{{-1}}\gamma^{{-e_b}}$, $n_b$={n_b:.0f}, $e_b$={e_b:.2f}")
    ax.set_xlabel(r"$\gamma$")
    ax.set_ylabel(r"amplitude $[\lambda_c]$")
    ax.set_title(f"oscillation amplitude, b = {fits.get('b', '?')}")
    ax.legend()
    return fig


def _retention(job: FigureJob):
    axis, rows = _sweep_reports(job)
    points = []
    for value, report in rows:
        retained = report.get("momentum_retention")
        if isinstance(retained, float) and np.isfinite(retained):
            points.append((float(value), retained))
    if not points:
        raise formats.FormatError(
            f"no finite momentum_retention entries under {job.run_dir / 'sweep'}"
        )
    points.sort()
    fig, ax = _new_axes()
    ax.plot(*zip(*points), "o-")
    ax.set_xlabel(axis)
    ax.set_ylabel("momentum retention")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("retained momentum fraction after the kick")
    return fig


def _cloud(job: FigureJob):
    traj = formats.read_trajectory(job.run_dir / "trajectory.dat")
    cfg = formats.read_config(job.run_dir / "config_echo.cfg")
    dt = float(cfg["time.dt"]) * float(cfg["record.traj_stride"])
    t = traj["t"]
    tail = t >= t[-1] - 8.0
    xy = np.column_stack([traj["x"][tail], traj["y"][tail]])
    # display detrend: subtract a 2-period boxcar so only the fast
    # oscillation remains
    width = max(3, int(round(2.0 / dt)) | 1)
    kernel = np.ones(width) / width
    trend = np.column_stack(
        [np.convolve(xy[:, j], kernel, mode="valid") for j in range(2)]
    )
    half = width // 2
    delta = xy[half:-half] - trend
    tt = t[tail][half:-half]
    fig, ax = _new_axes()
    sc = ax.scatter(delta[:, 0], delta[:, 1], c=tt, s=4, cmap="viridis")
    ax.set_xlabel(r"$\delta x/\lambda_c$")
    ax.set_ylabel(r"$\delta y/\lambda_c$")
    ax.set_aspect("equal")
    ax.set_title("oscillation cloud (trend removed)")
    fig.colorbar(sc, ax=ax, label="t [Compton periods]")
    return fig


_PANELS = {
    "field-view": _field_view,
    "spectrogram": _spectrogram,
    "amplitude-fit": _amplitude_fit,
    "retention": _retention,
    "cloud": _cloud,
}


def render(job: FigureJob) -> Path:
    """Draw one panel and write it to job.out; returns the output path."""
    fig = _PANELS[job.kind](job)
    job.out.parent.mkdir(parents=True, exist_ok=True)
    kwargs = {}
    if job.out.suffix.lower() == ".png":
        kwargs["metadata"] = {"Software": "pwfigures"}  # no volatile fields
    fig.savefig(job.out, dpi=job.style.dpi, **kwargs)
    plt.close(fig)
    return job.out
