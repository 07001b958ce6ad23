"""Relativistic point particle guided by a sampled field gradient.

State is (position, reduced momentum g = gamma u); the equations of
motion are q' = g / gamma and g' = (b / gamma) grad phi at the particle.
Positions are in Compton wavelengths and times in Compton periods, so a
unit speed crosses one wavelength per period; the gradient callable is
expected to return the field slope per natural length at a position
given in wavelengths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def gamma_of(g) -> float | np.ndarray:
    """Lorentz factor sqrt(1 + |g|^2) from the reduced momentum."""
    g = np.asarray(g, float)
    return np.sqrt(1.0 + np.sum(g * g, axis=-1))


def velocity_of(g) -> np.ndarray:
    """Velocity u = g / gamma; always strictly below 1."""
    g = np.asarray(g, float)
    return g / gamma_of(g)[..., None] if g.ndim > 1 else g / gamma_of(g)


@dataclass
class ParticleState:
    position: np.ndarray
    reduced_momentum: np.ndarray

    def __post_init__(self) -> None:
        self.position = np.atleast_1d(np.asarray(self.position, float))
        self.reduced_momentum = np.atleast_1d(np.asarray(self.reduced_momentum, float))
        if self.position.shape != (2,) or self.reduced_momentum.shape != (2,):
            raise ValueError("particle state must hold 2D vectors")
        if not (
            np.all(np.isfinite(self.position))
            and np.all(np.isfinite(self.reduced_momentum))
        ):
            raise ValueError("particle state must be finite")

    @property
    def gamma(self) -> float:
        return float(gamma_of(self.reduced_momentum))

    @property
    def velocity(self) -> np.ndarray:
        return self.reduced_momentum / self.gamma

    @classmethod
    def at_rest(cls, position) -> "ParticleState":
        return cls(np.asarray(position, float), np.zeros(2))


@dataclass(frozen=True)
class CouplingParams:
    """Particle-field coupling: strength b and the shared Gaussian variance
    of the source and of the force sampling (None = 2/m^2)."""

    b: float
    source_variance: float | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.b):
            raise ValueError("coupling b must be finite")
        if self.source_variance is not None and self.source_variance <= 0.0:
            raise ValueError("source variance must be positive")


def kick_momentum(u0) -> np.ndarray:
    """Reduced-momentum impulse gamma(u0) u0 that boosts a rest particle
    to velocity u0."""
    u0 = np.asarray(u0, float)
    speed2 = float(u0 @ u0)
    if speed2 >= 1.0:
        raise ValueError(f"kick target speed |u0| = {math.sqrt(speed2):.4g} must be < 1")
    return u0 / math.sqrt(1.0 - speed2)


def kick(state: ParticleState, u0, fraction: float = 1.0) -> ParticleState:
    """Apply (a fraction of) the impulse that takes a rest particle to
    velocity u0; adds to whatever momentum the particle already has."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("kick fraction must lie in [0, 1]")
    dg = fraction * kick_momentum(u0)
    return ParticleState(state.position.copy(), state.reduced_momentum + dg)


def step_particle(
    state: ParticleState,
    dt: float,
    gradient,
    b: float,
    m: float = 1.0,
) -> ParticleState:
    """One RK4 step of the guidance law; `dt` in Compton periods,
    `gradient(q)` the natural-units field slope at q (wavelengths)."""
    if dt == 0.0 or not math.isfinite(dt):
        raise ValueError("dt must be non-zero and finite")
    period_c = 2.0 * math.pi / m
    # g' picks up the period because the natural-units force law is
    # integrated in per-period time
    force_scale = (b * period_c) if b != 0.0 else 0.0

    def rhs(q, g):
        gam = math.sqrt(1.0 + float(g @ g))
        dq = g / gam
        dg = (force_scale / gam) * np.asarray(gradient(q), float) if b != 0.0 else np.zeros(2)
        return dq, dg

    q, g = state.position, state.reduced_momentum
    k1q, k1g = rhs(q, g)
    k2q, k2g = rhs(q + 0.5 * dt * k1q, g + 0.5 * dt * k1g)
    k3q, k3g = rhs(q + 0.5 * dt * k2q, g + 0.5 * dt * k2g)
    k4q, k4g = rhs(q + dt * k3q, g + dt * k3g)
    new_q = q + (dt / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
    new_g = g + (dt / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
    return ParticleState(new_q, new_g)
