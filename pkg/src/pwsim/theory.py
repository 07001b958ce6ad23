"""Closed-form predictors for the pilot-wave system.

Everything in this module is an analytic expression or a deterministic
quadrature: steady wavepacket profiles, radiation-front kinematics,
oscillation frequencies, effective mass, the uncertainty floor, and the
empirical amplitude-fit table.  These functions double as test oracles
for the simulation modules and as the backend of the `predict` command.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import j1 as _bessel_j1
from scipy.special import roots_genlaguerre

EULER_GAMMA = 0.5772156649015329

# Scale of the empirical inertia fit: virtual_mass(b) = (b / FIT_MASS_SCALE)^2.
FIT_MASS_SCALE = 163.8


class FitConstants(NamedTuple):
    """One row of the amplitude-fit table: A(gamma) = lam_c / (n_b * gamma^e_b)."""

    b: float
    e_b: float
    n_b: float


FIT_TABLE: tuple[FitConstants, ...] = (
    FitConstants(13.3, 3.88, 238.0),
    FitConstants(26.7, 3.52, 69.0),
    FitConstants(40.0, 2.87, 39.0),
    FitConstants(53.3, 2.38, 28.0),
    FitConstants(66.7, 2.10, 23.0),
    FitConstants(80.0, 1.97, 21.0),
)


@dataclass
class TheoryInputs:
    """Kinematic inputs for the predictors: mass, coupling and speeds."""

    m: float = 1.0
    b: float = 53.3
    u0: float = 0.0
    v: float = 0.0

    def __post_init__(self) -> None:
        if abs(self.u0) >= 1.0 or abs(self.v) >= 1.0:
            raise ValueError("speeds must be sub-luminal")
        if self.m <= 0.0:
            raise ValueError("mass must be positive")


def _gamma_u(u: float) -> float:
    if abs(u) >= 1.0:
        raise ValueError(f"superluminal speed {u}")
    return 1.0 / math.sqrt(1.0 - u * u)


_K0_NODES, _K0_WEIGHTS = roots_genlaguerre(40, -0.5)


def bessel_k0(x):
    """Modified Bessel function K0, series below 2 and an exponentially
    weighted quadrature beyond.

    The ascending series loses digits through cancellation as x grows and
    the textbook large-x expansion only reaches ~e^{-2x} accuracy, so the
    tail uses Gauss quadrature of the integral representation
    K0(x) = e^{-x} int_0^inf e^{-u} u^{-1/2} (u + 2x)^{-1/2} du,
    which is clean to machine precision for x >= 2.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("K0 requires x > 0")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)

    small = x <= 2.0
    if np.any(small):
        xs = x[small]
        q = 0.25 * xs * xs
        term = np.ones_like(xs)
        i0 = np.ones_like(xs)
        acc = np.zeros_like(xs)
        harmonic = 0.0
        for k in range(1, 30):
            term = term * q / (k * k)
            i0 += term
            harmonic += 1.0 / k
            acc += term * harmonic
        out[small] = -(np.log(0.5 * xs) + EULER_GAMMA) * i0 + acc
    if np.any(~small):
        xl = x[~small]
        f = 1.0 / np.sqrt(_K0_NODES[:, None] + 2.0 * xl[None, :])
        out[~small] = np.exp(-xl) * (_K0_WEIGHTS @ f)
    return out[0] if scalar else out


def static_profile_2d(r, b: float, m: float = 1.0):
    """Field of a held point source of amplitude b/m in two dimensions,
    b * K0(m r) / (2 pi m)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("radius must be positive")
    return b * bessel_k0(m * r) / (2.0 * math.pi * m)


def yukawa_packet_3d(q, t: float, u: float, b: float, m: float = 1.0):
    """Steady wavepacket riding a particle moving at speed u along x:
    b exp(-m R)/(4 pi m R) with R the boost-contracted distance."""
    gam = _gamma_u(u)
    q = np.asarray(q, dtype=float)
    x = q[..., 0] - u * t
    big_r = np.sqrt(gam * gam * x * x + q[..., 1] ** 2 + q[..., 2] ** 2)
    if np.any(big_r == 0.0):
        raise ValueError("singular point of the wavepacket")
    return b * np.exp(-m * big_r) / (4.0 * math.pi * m * big_r)


@dataclass
class GreenValue:
    """Retarded response at one spacetime point.

    The singular light-cone shell cannot be sampled numerically, so it is
    reported as (arrival time, weight); `regular` holds the interior term.
    """

    shell_time: float
    shell_weight: float
    regular: float


def green_function(q, t: float, m: float = 1.0) -> GreenValue:
    """Point-impulse response of the wave equation with mass m."""
    r = float(np.linalg.norm(q))
    if t < 0.0 or t < r:
        return GreenValue(shell_time=r, shell_weight=0.0, regular=0.0)
    weight = math.inf if r == 0.0 else 1.0 / (4.0 * math.pi * r)
    s = math.sqrt(max(t * t - r * r, 0.0))
    if s == 0.0:
        regular = -m * m / (4.0 * math.pi)
    else:
        regular = -(m * m / (2.0 * math.pi)) * _bessel_j1(m * s) / (m * s)
    return GreenValue(shell_time=r, shell_weight=weight, regular=regular)


def de_broglie_wavelength(g, m: float = 1.0) -> float:
    """Wavelength 2 pi/(m |g|) of the field region adjoining a mover."""
    mag = float(np.linalg.norm(g))
    if mag == 0.0:
        return math.inf
    return 2.0 * math.pi / (m * mag)


def zitter_frequency(u: float) -> float:
    """In-line oscillation frequency after settling, in units of omega_c."""
    return 1.0 / _gamma_u(u)


def max_frequency(u: float) -> float:
    """Upper edge gamma (1 + u^2) of the late-time vibration band, omega_c units."""
    return _gamma_u(u) * (1.0 + u * u)


@dataclass
class WavefrontEllipse:
    center: tuple[float, float]
    semi_inline: float
    semi_transverse: float
    u_source: float
    u_expansion: float


def wavefront(u0: float, v: float, t: float) -> WavefrontEllipse:
    """Radiation front seeded by a velocity change.

    A disturbance expanding circularly at wave speed v in the frame
    co-moving at the prior velocity u0 appears in the lab as an ellipse
    drifting at u_source, growing at u_expansion, contracted in-line.
    """
    if abs(u0) >= 1.0 or abs(v) >= 1.0:
        raise ValueError("superluminal input")
    if t < 0.0:
        raise ValueError("negative time")
    denom = 1.0 - u0 * u0 * v * v
    u_source = (1.0 - v * v) / denom * u0
    contraction = math.sqrt((1.0 - u0 * u0) / denom)
    u_expansion = v * contraction
    semi_t = u_expansion * t
    return WavefrontEllipse(
        center=(u_source * t, 0.0),
        semi_inline=contraction * semi_t,
        semi_transverse=semi_t,
        u_source=u_source,
        u_expansion=u_expansion,
    )


def virtual_mass(b: float) -> float:
    """Fractional mass carried by the adjoined wavepacket, (b/163.8)^2."""
    if b < 0.0:
        raise ValueError("coupling must be non-negative")
    return (b / FIT_MASS_SCALE) ** 2


def effective_mass(b: float, m: float = 1.0) -> float:
    return m * (1.0 + virtual_mass(b))


def fit_constants(b: float) -> FitConstants:
    """Amplitude-fit constants (e_b, n_b) interpolated linearly in b.

    Outside the tabulated range [13.3, 80.0] there is no data to lean on;
    extrapolation raises instead of guessing.
    """
    bs = [row.b for row in FIT_TABLE]
    if b < bs[0] or b > bs[-1]:
        raise ValueError(f"coupling {b} outside fit table range [{bs[0]}, {bs[-1]}]")
    e_b = float(np.interp(b, bs, [row.e_b for row in FIT_TABLE]))
    n_b = float(np.interp(b, bs, [row.n_b for row in FIT_TABLE]))
    return FitConstants(b, e_b, n_b)


def uncertainty_bound(b: float, gamma: float) -> float:
    """Lower bound on sigma_x sigma_p per axis for the oscillation cloud."""
    if gamma < 1.0:
        raise ValueError("gamma must be >= 1")
    row = fit_constants(b)
    m_ratio = 1.0 + virtual_mass(b)
    return 0.5 * m_ratio * gamma ** (4.0 - 2.0 * row.e_b) / row.n_b**2


def coupling_rescale(b: float, v: float, s: float) -> tuple[float, float]:
    """Coupling seen in a frame boosted at v against waves of group speed s.

    Returns (b_tilde, b_prime) with b_tilde = b (1 - v/s)/(1 + v s) and
    b_prime the geometric mean sqrt(b_tilde * b).
    """
    if s == 0.0:
        raise ValueError("wave speed s must be nonzero")
    if abs(v) >= 1.0 or abs(s) >= 1.0:
        raise ValueError("superluminal input")
    b_tilde = b * (1.0 - v / s) / (1.0 + v * s)
    b_prime = math.sqrt(b_tilde * b) if b_tilde >= 0.0 else float("nan")
    return b_tilde, b_prime


def continuous_component(
    phi: Callable[[np.ndarray], float],
    center=(0.0, 0.0, 0.0),
    singular_coeff: float = 0.0,
    matrix=None,
    r0: float = 0.4,
    levels: int = 5,
) -> float:
    """Regular part of a field with an inverse-distance singularity.

    Evaluates the spherical mean of d/dr (r phi) on shells of shrinking
    radius r0 / 2^j and Richardson-extrapolates the even-order error away.
    The singular family a / sqrt(dq^T A dq) contributes a constant to
    r phi on each ray, so it drops out of the radial derivative exactly;
    `singular_coeff` and `matrix` only describe the expected structure and
    are validated, not subtracted.
    """
    if matrix is not None:
        a_mat = np.asarray(matrix, dtype=float)
        if a_mat.shape != (3, 3) or not np.allclose(a_mat, a_mat.T):
            raise ValueError("matrix must be symmetric 3x3")
        if np.any(np.linalg.eigvalsh(a_mat) <= 0.0):
            raise ValueError("matrix must be positive definite")

    center = np.asarray(center, dtype=float)
    # product rule on the sphere: Gauss nodes in cos(polar), uniform azimuth
    nodes, weights = np.polynomial.legendre.leggauss(24)
    azim = np.linspace(0.0, 2.0 * math.pi, 48, endpoint=False)
    ct = nodes[:, None]
    st = np.sqrt(1.0 - ct * ct)
    dirs = np.stack(
        [
            (st * np.cos(azim)[None, :]).ravel(),
            (st * np.sin(azim)[None, :]).ravel(),
            np.broadcast_to(ct, (24, 48)).ravel(),
        ],
        axis=1,
    )
    wts = np.repeat(weights / (2.0 * len(azim)), len(azim))

    def shell_mean(r: float) -> float:
        h = 0.05 * r
        hi = np.array([phi(center + (r + h) * d) for d in dirs])
        lo = np.array([phi(center + (r - h) * d) for d in dirs])
        deriv = ((r + h) * hi - (r - h) * lo) / (2.0 * h)
        return float(wts @ deriv)

    seq = [shell_mean(r0 / 2.0**j) for j in range(levels)]
    # the remainder has every integer power of r when phi is only piecewise
    # smooth in |q| (Yukawa-type fields), so eliminate r^1, r^2, ... in turn
    table = [list(seq)]
    for k in range(1, levels):
        prev = table[-1]
        fac = 2.0**k
        table.append([(fac * prev[j + 1] - prev[j]) / (fac - 1.0) for j in range(len(prev) - 1)])
    return table[-1][0]
