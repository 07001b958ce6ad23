"""Pseudo-spectral Klein-Gordon field on a periodic square grid.

The state is held in rfft2 space, where the wave operator is diagonal and
a Gaussian point source has an exact separable spectrum.  Public lengths
(domain side, positions) are measured in Compton wavelengths lam_c =
2 pi / m and times in Compton periods; gradients and the energy/momentum
sums are returned in natural units (m sets the scale, c = 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np


class FieldBlowupError(RuntimeError):
    """Raised when the field norm passes the configured blow-up threshold."""


class SpectralGridError(ValueError):
    pass


class GridSpec:
    """Square periodic grid: n points per axis over a side of `length` lam_c."""

    def __init__(self, n: int, length: float, m: float = 1.0):
        if n < 8 or n % 2 != 0:
            raise SpectralGridError(f"grid n must be even and >= 8, got {n}")
        if length <= 0.0 or m <= 0.0:
            raise SpectralGridError("length and m must be positive")
        self.n = int(n)
        self.length = float(length)
        self.m = float(m)
        self.lam_c = 2.0 * math.pi / self.m
        self.period_c = 2.0 * math.pi / self.m
        self.side = self.length * self.lam_c
        self.dx = self.side / self.n
        self.cell = self.dx * self.dx
        self.kx = 2.0 * math.pi * np.fft.fftfreq(self.n, d=self.dx)
        self.ky = 2.0 * math.pi * np.fft.rfftfreq(self.n, d=self.dx)
        self.k2 = self.kx[:, None] ** 2 + self.ky[None, :] ** 2
        self.omega2 = self.k2 + self.m * self.m
        # rfft column weights: interior ky columns represent two conjugate modes
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        self.weights = w

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GridSpec)
            and (self.n, self.length, self.m) == (other.n, other.length, other.m)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.length, self.m))

    def __repr__(self) -> str:
        return f"GridSpec(n={self.n}, length={self.length}, m={self.m})"

    @property
    def omega_max(self) -> float:
        k_nyq = math.pi * self.n / self.side
        return math.sqrt(self.m * self.m + 2.0 * k_nyq * k_nyq)

    def max_stable_dt(self) -> float:
        """Largest allowed step, in Compton periods (0.5/omega_max margin)."""
        return 0.5 / self.omega_max / self.period_c

    def default_variance(self) -> float:
        return 2.0 / (self.m * self.m)


@dataclass
class FieldState:
    """Field phi and its rate eta = d_t phi, stored spectrally.

    `time` is in Compton periods.  The arrays are rfft2 coefficients of
    the real fields; use .phi / .eta for node values.
    """

    grid: GridSpec
    phi_hat: np.ndarray
    eta_hat: np.ndarray
    time: float = 0.0

    @classmethod
    def zero(cls, grid: GridSpec, time: float = 0.0) -> "FieldState":
        shape = (grid.n, grid.n // 2 + 1)
        return cls(grid, np.zeros(shape, complex), np.zeros(shape, complex), time)

    @classmethod
    def from_real(cls, grid: GridSpec, phi, eta, time: float = 0.0) -> "FieldState":
        phi = np.asarray(phi, float)
        eta = np.asarray(eta, float)
        if phi.shape != (grid.n, grid.n) or eta.shape != (grid.n, grid.n):
            raise SpectralGridError("field arrays must match the grid shape")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(eta))):
            raise SpectralGridError("field arrays must be finite")
        return cls(grid, np.fft.rfft2(phi), np.fft.rfft2(eta), time)

    @property
    def phi(self) -> np.ndarray:
        return np.fft.irfft2(self.phi_hat, s=(self.grid.n, self.grid.n))

    @property
    def eta(self) -> np.ndarray:
        return np.fft.irfft2(self.eta_hat, s=(self.grid.n, self.grid.n))


@dataclass
class SourceSpec:
    """Gaussian source: `amplitude` times a unit-integral Gaussian of the
    given per-axis variance (natural units), centered at `center` (lam_c)."""

    center: tuple[float, float]
    amplitude: float
    variance: float

    def __post_init__(self) -> None:
        if self.variance <= 0.0:
            raise ValueError("source variance must be positive")
        if not np.all(np.isfinite([*self.center, self.amplitude])):
            raise ValueError("source parameters must be finite")


def dispersion_omega(k, m: float = 1.0):
    """Frequency sqrt(m^2 + |k|^2) of a free wave, natural units."""
    k = np.asarray(k, float)
    return np.sqrt(m * m + np.sum(k * k, axis=-1))


def group_velocity(k, m: float = 1.0):
    """Packet velocity k/omega; inverts to k = m gamma(v) v."""
    k = np.asarray(k, float)
    return k / dispersion_omega(k, m)[..., None]


def source_hat(spec: SourceSpec, grid: GridSpec) -> np.ndarray:
    """rfft2 coefficients of the gridded source (analytic, separable)."""
    qx = spec.center[0] * grid.lam_c
    qy = spec.center[1] * grid.lam_c
    ax = np.exp(-0.5 * spec.variance * grid.kx**2 - 1j * grid.kx * qx)
    ay = np.exp(-0.5 * spec.variance * grid.ky**2 - 1j * grid.ky * qy)
    return (spec.amplitude / grid.cell) * np.outer(ax, ay)


def build_source(particle, b: float, grid: GridSpec, variance: float | None = None) -> np.ndarray:
    """Gridded source term for a particle state: (b / m gamma) times a
    wrapped unit-integral Gaussian at the particle position."""
    g = np.asarray(particle.reduced_momentum, float)
    q = np.asarray(particle.position, float)
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(q))):
        raise ValueError("non-finite particle state")
    gamma = math.sqrt(1.0 + float(g @ g))
    var = grid.default_variance() if variance is None else variance
    spec = SourceSpec(center=(q[0], q[1]), amplitude=b / (grid.m * gamma), variance=var)
    return np.fft.irfft2(source_hat(spec, grid), s=(grid.n, grid.n))


def step_field(
    state: FieldState,
    dt: float,
    source: np.ndarray | None = None,
    blowup_threshold: float = 1.0e6,
) -> FieldState:
    """One RK4 step of phi' = eta, eta' = lap phi - m^2 phi + S with the
    source held fixed over the step.  `dt` is in Compton periods."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    grid = state.grid
    if dt > grid.max_stable_dt():
        raise ValueError(
            f"dt = {dt} Compton periods exceeds the stability bound "
            f"{grid.max_stable_dt():.6g} for this grid"
        )
    if source is None:
        s_hat = 0.0
    else:
        source = np.asarray(source, float)
        if source.shape != (grid.n, grid.n):
            raise ValueError("source shape does not match the grid")
        s_hat = np.fft.rfft2(source)

    h = dt * grid.period_c
    w2 = grid.omega2
    p, e = state.phi_hat, state.eta_hat
    # RK4 stages of the linear system with constant forcing
    k1p, k1e = e, -w2 * p + s_hat
    k2p, k2e = e + 0.5 * h * k1e, -w2 * (p + 0.5 * h * k1p) + s_hat
    k3p, k3e = e + 0.5 * h * k2e, -w2 * (p + 0.5 * h * k2p) + s_hat
    k4p, k4e = e + h * k3e, -w2 * (p + h * k3p) + s_hat
    new_p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    new_e = e + (h / 6.0) * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)

    rms = math.sqrt(_hat_norm_sq(new_p, grid) / grid.n**2)
    if not math.isfinite(rms) or rms > blowup_threshold:
        raise FieldBlowupError(
            f"field rms {rms:.3g} beyond threshold {blowup_threshold:.3g} "
            f"at t = {state.time + dt:.6g}"
        )
    return replace(state, phi_hat=new_p, eta_hat=new_e, time=state.time + dt)


def _hat_norm_sq(a_hat: np.ndarray, grid: GridSpec) -> float:
    return float(np.sum(grid.weights * (a_hat.real**2 + a_hat.imag**2)) / grid.n**2)


def _sample(
    hat: np.ndarray,
    grid: GridSpec,
    q,
    mollify_variance: float | None = None,
    gradient: bool = False,
):
    """Evaluate the band-limited interpolant (optionally Gaussian-filtered)
    at an off-grid point via separable contraction of the spectrum."""
    qx = float(q[0]) * grid.lam_c
    qy = float(q[1]) * grid.lam_c
    wx = np.exp(1j * grid.kx * qx)
    wy = np.exp(1j * grid.ky * qy)
    if mollify_variance is not None:
        w = np.exp(-0.5 * mollify_variance * grid.k2) * hat
    else:
        w = hat
    col = w @ (grid.weights * wy)
    norm = 1.0 / grid.n**2
    value = float(np.real(col @ wx)) * norm
    if not gradient:
        return value
    col_dy = w @ (grid.weights * wy * (1j * grid.ky))
    gx = float(np.real((col * (1j * grid.kx)) @ wx)) * norm
    gy = float(np.real(col_dy @ wx)) * norm
    return value, np.array([gx, gy])


def sample_value(state: FieldState, q) -> float:
    """Field value at position q (lam_c units); exact on grid nodes."""
    return _sample(state.phi_hat, state.grid, q)


def sample_gradient(state: FieldState, q) -> np.ndarray:
    """Spectral gradient of phi at q (lam_c units), per natural length."""
    _, grad = _sample(state.phi_hat, state.grid, q, gradient=True)
    return grad


def field_momentum(state: FieldState) -> np.ndarray:
    """Total field momentum -m^2 sum eta grad(phi) cell, natural units.

    The sign makes a packet moving toward +x carry positive x-momentum.
    """
    grid = state.grid
    pref = -grid.m**2 * grid.cell / grid.n**2
    cross = np.conj(state.eta_hat) * state.phi_hat
    px = pref * float(np.sum(grid.weights * np.real(cross * (1j * grid.kx[:, None]))))
    py = pref * float(np.sum(grid.weights * np.real(cross * (1j * grid.ky[None, :]))))
    return np.array([px, py])


def field_energy(state: FieldState) -> float:
    """Total field energy m^2 sum (eta^2 + |grad phi|^2 + m^2 phi^2)/2 cell."""
    grid = state.grid
    pref = grid.m**2 * grid.cell / grid.n**2
    quad = np.sum(
        grid.weights
        * (
            np.abs(state.eta_hat) ** 2
            + grid.omega2 * np.abs(state.phi_hat) ** 2
        )
    )
    return 0.5 * pref * float(quad)


def field_angular_momentum(state: FieldState, center=None) -> float:
    """z angular momentum of the field about `center` (lam_c units,
    defaults to the domain center), computed on the nodes."""
    grid = state.grid
    if center is None:
        center = (grid.length / 2.0, grid.length / 2.0)
    coords = np.arange(grid.n) * grid.dx
    x = coords[:, None] - center[0] * grid.lam_c
    y = coords[None, :] - center[1] * grid.lam_c
    eta = state.eta
    dphi_dx = np.fft.irfft2(state.phi_hat * (1j * grid.kx[:, None]), s=(grid.n, grid.n))
    dphi_dy = np.fft.irfft2(state.phi_hat * (1j * grid.ky[None, :]), s=(grid.n, grid.n))
    integrand = eta * (x * dphi_dy - y * dphi_dx)
    return -grid.m**2 * grid.cell * float(np.sum(integrand))
