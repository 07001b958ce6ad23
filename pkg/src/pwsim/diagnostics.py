"""Budget bookkeeping and time-frequency analysis of recorded runs.

Everything here is a pure transformation of recorded series; amplitudes
keep the units of the input signal and frequencies are quoted in units
of the Compton frequency (cycles per Compton period).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.signal import butter, filtfilt, hilbert

from .field_core import FieldState, sample_value
from .simulation import RunOutput


@dataclass
class BudgetSeries:
    """Aligned conservation-law series: particle and field energy,
    momentum, angular momentum about the domain center, and the running
    interaction work (exchange integral)."""

    times: np.ndarray
    p_part: np.ndarray
    p_field: np.ndarray
    e_part: np.ndarray
    e_field: np.ndarray
    exchange: np.ndarray
    l_z: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.times)
        for name in ("p_part", "p_field", "e_part", "e_field", "exchange", "l_z"):
            if len(getattr(self, name)) != n:
                raise ValueError("budget series lengths differ")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("budget times must be strictly increasing")

    def window(self, t_min: float, t_max: float) -> "BudgetSeries":
        sel = (self.times >= t_min) & (self.times <= t_max)
        if not np.any(sel):
            raise ValueError(f"no budget samples in [{t_min}, {t_max}]")
        return BudgetSeries(
            times=self.times[sel],
            p_part=self.p_part[sel],
            p_field=self.p_field[sel],
            e_part=self.e_part[sel],
            e_field=self.e_field[sel],
            exchange=self.exchange[sel],
            l_z=self.l_z[sel],
        )


@dataclass
class Spectrogram:
    """Short-time Fourier magnitudes: rows are frequency bins (units of
    the Compton frequency), columns window centers (Compton periods).
    Magnitudes are scaled so a unit sinusoid on an exact bin peaks at 1.
    """

    window: int
    hop: int
    freqs: np.ndarray
    times: np.ndarray
    mag: np.ndarray
    note: str = "amplitude-scaled Hann STFT; display normalization left to consumers"

    def __post_init__(self) -> None:
        if self.mag.shape != (len(self.freqs), len(self.times)):
            raise ValueError("magnitude matrix shape does not match the bins")
        if np.any(self.mag < 0.0):
            raise ValueError("magnitudes must be non-negative")


def budgets(run: RunOutput) -> BudgetSeries:
    """Assemble the conservation series of a run from its recorded
    budget rows; the angular momentum adds the particle term to the
    recorded field value."""
    bu = run.budgets
    if len(bu["t"]) == 0:
        raise ValueError("run carries no budget samples")
    tr = run.trajectory
    m = run.grid.m
    lam_c = run.grid.lam_c
    idx = np.searchsorted(tr["t"], bu["t"] - 1e-12)
    if idx[-1] >= len(tr["t"]) or not np.allclose(
        tr["t"][idx], bu["t"], atol=1e-9
    ):
        raise ValueError("budget rows are not aligned with the trajectory stride")
    center = run.config.grid.length / 2.0
    x_rel = (tr["x"][idx] - center) * lam_c
    y_rel = (tr["y"][idx] - center) * lam_c
    l_part = x_rel * bu["p_particle_y"] - y_rel * bu["p_particle_x"]
    return BudgetSeries(
        times=bu["t"].copy(),
        p_part=np.column_stack([bu["p_particle_x"], bu["p_particle_y"]]),
        p_field=np.column_stack([bu["p_field_x"], bu["p_field_y"]]),
        e_part=bu["e_particle"].copy(),
        e_field=bu["e_field"].copy(),
        exchange=bu["exchange_cum"].copy(),
        l_z=bu["l_field"] + l_part,
    )


def energy_residual(budget: BudgetSeries) -> np.ndarray:
    """Balance-law residual r(t): total energy change plus the booked
    interaction work, relative to the first sample."""
    total = budget.e_part + budget.e_field
    return (total - total[0]) + (budget.exchange - budget.exchange[0])


def spectrogram(
    signal,
    dt: float,
    window_periods: float = 8.0,
    hop: int | None = None,
) -> Spectrogram:
    """Hann-window STFT of a uniformly sampled series (dt in Compton
    periods); default window 8 periods, hop an eighth of the window."""
    signal = np.asarray(signal, float)
    if signal.ndim != 1:
        raise ValueError("spectrogram expects a 1D series")
    nwin = int(round(window_periods / dt))
    if nwin < 8:
        raise ValueError("window too short for the sampling interval")
    if nwin > len(signal):
        raise ValueError("window longer than the series")
    if hop is None:
        hop = max(1, nwin // 8)
    # periodic Hann: exact-bin tones then split cleanly over 3 bins
    win = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(nwin) / nwin)
    scale = 2.0 / float(np.sum(win))
    n_cols = 1 + (len(signal) - nwin) // hop
    freqs = np.fft.rfftfreq(nwin, d=dt)
    mag = np.empty((len(freqs), n_cols))
    times = np.empty(n_cols)
    for j in range(n_cols):
        start = j * hop
        seg = signal[start : start + nwin] * win
        mag[:, j] = np.abs(np.fft.rfft(seg)) * scale
    times[:] = (np.arange(n_cols) * hop + 0.5 * nwin) * dt
    return Spectrogram(window=nwin, hop=hop, freqs=freqs, times=times, mag=mag)


def dominant_frequency(
    spec: Spectrogram,
    t_range: tuple[float, float] | None = None,
    min_frequency: float = 0.1,
) -> float:
    """Strongest frequency over the selected time bins, refined by
    parabolic interpolation of the log magnitudes around the peak."""
    if t_range is None:
        cols = np.ones(len(spec.times), bool)
    else:
        cols = (spec.times >= t_range[0]) & (spec.times <= t_range[1])
    if not np.any(cols):
        raise ValueError(f"no spectrogram columns in range {t_range}")
    profile = np.mean(spec.mag[:, cols], axis=1)
    valid = spec.freqs >= min_frequency
    if not np.any(valid):
        raise ValueError("min_frequency excludes every bin")
    offset = int(np.argmax(valid))
    i = offset + int(np.argmax(profile[valid]))
    if 0 < i < len(profile) - 1 and profile[i] > 0.0:
        a, b, c = profile[i - 1], profile[i], profile[i + 1]
        if a > 0.0 and c > 0.0:
            la, lb, lc = math.log(a), math.log(b), math.log(c)
            denom = la - 2.0 * lb + lc
            if denom < 0.0:
                shift = 0.5 * (la - lc) / denom
                return float(spec.freqs[i] + shift * (spec.freqs[1] - spec.freqs[0]))
    return float(spec.freqs[i])


def highpass(signal, dt: float, cutoff: float = 0.5):
    """Zero-phase 4th-order Butterworth highpass; cutoff in Compton
    frequencies, dt in Compton periods.  Columns filter independently."""
    signal = np.asarray(signal, float)
    nyquist = 0.5 / dt
    if cutoff >= nyquist:
        raise ValueError(f"cutoff {cutoff} at or above the Nyquist frequency {nyquist}")
    if cutoff <= 0.0:
        raise ValueError("cutoff must be positive")
    b, a = butter(4, cutoff / nyquist, btype="highpass")
    # pad a few cutoff periods so slow drifts do not ring at the edges
    padlen = min(signal.shape[0] - 1, int(round(3.0 / (cutoff * dt))))
    return filtfilt(b, a, signal, axis=0, padlen=padlen)


def oscillation_amplitude(spec: Spectrogram, tail: int) -> float:
    """Mean over the last `tail` time bins of the frequency-space L1
    norm, calibrated so a unit sinusoid on an exact bin returns 1."""
    if tail < 1 or tail > len(spec.times):
        raise ValueError("tail must select between 1 and all time bins")
    columns = np.sum(spec.mag[:, -tail:], axis=0)
    return float(np.mean(columns)) / 2.0


class AmplitudeFit(NamedTuple):
    n_b: float
    e_b: float
    residual: float


def fit_amplitude_scaling(points) -> AmplitudeFit:
    """Least squares for A = lam_c / (n_b gamma^e_b) in log space; the
    amplitudes are expected in units of lam_c."""
    pts = [(float(g), float(a)) for g, a in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 (gamma, amplitude) points")
    gam = np.array([p[0] for p in pts])
    amp = np.array([p[1] for p in pts])
    if np.any(gam <= 1.0) or np.any(amp <= 0.0):
        raise ValueError("need gamma > 1 and positive amplitudes")
    lg = np.log(gam)
    if np.ptp(lg) < 1e-12:
        raise ValueError("all gamma equal: scaling fit is degenerate")
    design = np.column_stack([np.ones_like(lg), lg])
    coef, *_ = np.linalg.lstsq(design, np.log(amp), rcond=None)
    resid = np.log(amp) - design @ coef
    return AmplitudeFit(
        n_b=float(np.exp(-coef[0])),
        e_b=float(-coef[1]),
        residual=float(np.sqrt(np.mean(resid**2))),
    )


def post_ramp_time(run: RunOutput) -> float:
    sc = run.config.scenario
    if sc.kind != "rest-kick":
        return 0.0
    dt = run.config.dt
    k_kick = int(round(sc.kick_time / dt))
    n_ramp = max(1, int(round(sc.ramp / dt))) if sc.ramp > 0.0 else 0
    return (k_kick + n_ramp) * dt


def momentum_retention(
    run: RunOutput,
    steady_window: float = 4.0,
    steady_tol: float = 0.25,
) -> float:
    """Fraction of the post-kick total momentum still carried by the
    particle once its mean velocity has settled."""
    tr = run.trajectory
    bu = run.budgets
    m = run.grid.m
    t_re = post_ramp_time(run)
    i0 = int(np.searchsorted(bu["t"], t_re - 1e-9))
    if i0 >= len(bu["t"]):
        raise ValueError("budget series ends before the ramp does")
    p0 = math.hypot(
        bu["p_field_x"][i0] + bu["p_particle_x"][i0],
        bu["p_field_y"][i0] + bu["p_particle_y"][i0],
    )
    if p0 == 0.0:
        raise ValueError("no momentum was imparted")
    t = tr["t"]
    sel = t >= t[-1] - steady_window
    g = np.column_stack([tr["g_x"][sel], tr["g_y"][sel]])
    speed = np.linalg.norm(g, axis=1) / np.sqrt(1.0 + np.sum(g * g, axis=1))
    mean_speed = float(np.mean(speed))
    if mean_speed > 0.0 and float(np.std(speed)) / mean_speed > steady_tol:
        raise RuntimeError(
            "steady state not reached: velocity variance above threshold"
        )
    p_steady = m * float(np.linalg.norm(np.mean(g, axis=0)))
    return p_steady / p0


class VirtualMassFit(NamedTuple):
    coefficient: float
    exponent: float
    residual: float


def virtual_mass_fit(points) -> VirtualMassFit:
    """Power law 1 - retention = coefficient * b^exponent from sweep
    optima, assuming the radiation-free optimum carries the whole wave
    momentum deficit."""
    pts = [(float(b), float(r)) for b, r in points]
    if len(pts) < 2:
        raise ValueError("need at least 2 (b, retention) points")
    b = np.array([p[0] for p in pts])
    deficit = 1.0 - np.array([p[1] for p in pts])
    if np.any(b <= 0.0) or np.any(deficit <= 0.0):
        raise ValueError("need positive b and retention < 1")
    design = np.column_stack([np.ones_like(b), np.log(b)])
    coef, *_ = np.linalg.lstsq(design, np.log(deficit), rcond=None)
    resid = np.log(deficit) - design @ coef
    return VirtualMassFit(
        coefficient=float(np.exp(coef[0])),
        exponent=float(coef[1]),
        residual=float(np.sqrt(np.mean(resid**2))),
    )


def uncertainty_product(zitter_xy, zitter_g, m_eff: float, dt: float):
    """Per-axis spread products sigma_x sigma_p of the filtered position
    and reduced-momentum series (p = m_eff g); pass natural units for a
    physically comparable product.  dt in Compton periods."""
    zitter_xy = np.atleast_2d(np.asarray(zitter_xy, float))
    zitter_g = np.atleast_2d(np.asarray(zitter_g, float))
    if zitter_xy.shape != zitter_g.shape or zitter_xy.shape[1] != 2:
        raise ValueError("need matching (n, 2) position and momentum series")
    if len(zitter_xy) * dt < 10.0:
        raise ValueError("window shorter than 10 Compton periods")
    sigma_x = np.std(zitter_xy, axis=0)
    sigma_p = np.std(m_eff * zitter_g, axis=0)
    return sigma_x * sigma_p


def local_wavenumber(
    state: FieldState,
    center,
    direction,
    window: float = 2.0,
    extent: float = 4.0,
    reference: FieldState | None = None,
) -> float:
    """Phase-gradient wavenumber (natural units) of the field along a
    ray through `center` (lam_c units), amplitude-weighted over a
    Gaussian window of the given width.  Subtracting a co-moving
    reference packet isolates the trailing wave train."""
    grid = state.grid
    e = np.asarray(direction, float)
    norm = float(np.linalg.norm(e))
    if norm == 0.0:
        raise ValueError("direction must be non-zero")
    e = e / norm
    ds = grid.dx / grid.lam_c
    n_half = int(round(extent / ds))
    s = (np.arange(-n_half, n_half + 1)) * ds
    center = np.asarray(center, float)
    values = np.empty(len(s))
    for i, si in enumerate(s):
        qi = center + si * e
        v = sample_value(state, qi)
        if reference is not None:
            v -= sample_value(reference, qi)
        values[i] = v
    analytic = hilbert(values - np.mean(values))
    phase = np.unwrap(np.angle(analytic))
    s_nat = s * grid.lam_c
    dphi = np.gradient(phase, s_nat)
    sigma = 0.5 * window * grid.lam_c
    weight = np.abs(analytic) ** 2 * np.exp(-0.5 * (s_nat / sigma) ** 2)
    total = float(np.sum(weight))
    if total <= 0.0:
        raise ValueError("field amplitude vanishes on the sampling ray")
    return float(np.sum(weight * np.abs(dphi)) / total)
