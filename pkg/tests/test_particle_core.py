from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pwsim.particle_core import (
    CouplingParams,
    ParticleState,
    gamma_of,
    kick,
    kick_momentum,
    step_particle,
    velocity_of,
)

LAM_C = 2.0 * math.pi

# End state of the reference orbit (DOP853 at rtol 1e-13, natural units,
# b = 2.1, start q = (0.3, -0.2), g = (0.25, -0.1), t = 25).
ORBIT_Q = np.array([-0.36961856758955, 1.59919329301976])
ORBIT_G = np.array([-0.37763383142381, 0.47011355880417])
ORBIT_GAMMA = 1.16773887012780


def orbit_gradient_natural(q):
    x, y = q
    return np.array(
        [
            -0.21 * math.sin(0.7 * x) * math.cos(0.4 * y)
            + 0.06 * math.cos(0.3 * x + 0.5 * y),
            -0.12 * math.cos(0.7 * x) * math.sin(0.4 * y)
            + 0.10 * math.cos(0.3 * x + 0.5 * y),
        ]
    )


def integrate_orbit(n_steps: int) -> ParticleState:
    state = ParticleState(np.array([0.3, -0.2]) / LAM_C, np.array([0.25, -0.1]))
    dt = (25.0 / LAM_C) / n_steps
    grad = lambda q: orbit_gradient_natural(q * LAM_C)
    for _ in range(n_steps):
        state = step_particle(state, dt, grad, b=2.1)
    return state


def test_gamma_examples():
    assert gamma_of([0.75, 0.0]) == pytest.approx(1.25)
    assert gamma_of([0.0, 0.0]) == 1.0
    assert velocity_of([0.75, 0.0])[0] == pytest.approx(0.6)


def test_gamma_vectorized_shape():
    g = np.zeros((5, 2))
    g[:, 0] = np.linspace(0.0, 2.0, 5)
    assert gamma_of(g).shape == (5,)
    assert velocity_of(g).shape == (5, 2)


@settings(max_examples=50, deadline=None)
@given(
    gx=st.floats(-50.0, 50.0, allow_nan=False),
    gy=st.floats(-50.0, 50.0, allow_nan=False),
)
def test_on_shell_invariant(gx, gy):
    g = np.array([gx, gy])
    gam = float(gamma_of(g))
    assert gam * gam - float(g @ g) == pytest.approx(1.0, rel=1e-12)
    assert float(np.linalg.norm(velocity_of(g))) < 1.0


def test_state_validation():
    with pytest.raises(ValueError):
        ParticleState([0.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        ParticleState([0.0, np.nan], [0.0, 0.0])
    with pytest.raises(ValueError):
        CouplingParams(b=math.inf)
    with pytest.raises(ValueError):
        CouplingParams(b=1.0, source_variance=-2.0)


def test_kick_reaches_target_velocity_from_rest():
    state = ParticleState.at_rest([1.0, 2.0])
    kicked = kick(state, [0.35, 0.0])
    gamma = 1.0 / math.sqrt(1.0 - 0.35**2)
    assert kicked.reduced_momentum[0] == pytest.approx(gamma * 0.35, rel=1e-14)
    assert kicked.reduced_momentum[0] == pytest.approx(0.37363236, rel=1e-7)
    assert np.allclose(kicked.velocity, [0.35, 0.0], atol=1e-14)

    half = kick(state, [0.5, 0.0])
    assert half.reduced_momentum[0] == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-14)
    assert half.reduced_momentum[0] == pytest.approx(0.57735027, rel=1e-7)


def test_kick_is_additive_and_partial():
    state = ParticleState([0.0, 0.0], [0.2, -0.1])
    out = kick(state, [0.3, 0.4], fraction=0.5)
    dg = 0.5 * kick_momentum([0.3, 0.4])
    assert np.allclose(out.reduced_momentum, state.reduced_momentum + dg, atol=1e-15)


def test_kick_rejects_superluminal_target():
    state = ParticleState.at_rest([0.0, 0.0])
    with pytest.raises(ValueError, match="< 1"):
        kick(state, [1.0, 0.0])
    with pytest.raises(ValueError, match="< 1"):
        kick_momentum([0.8, 0.8])


def test_free_particle_moves_ballistically():
    g0 = np.array([0.6, -0.3])
    state = ParticleState(np.array([1.0, 2.0]), g0)
    u = velocity_of(g0)
    t = 0.0
    for _ in range(37):
        state = step_particle(state, 0.11, lambda q: np.zeros(2), b=0.0)
        t += 0.11
    assert np.allclose(state.position, [1.0, 2.0] + u * t, atol=1e-13)
    assert np.allclose(state.reduced_momentum, g0, atol=0.0)


def test_ballistic_step_reverses_exactly():
    g0 = np.array([0.6, -0.3])
    start = ParticleState(np.array([1.0, 2.0]), g0)
    fwd = step_particle(start, 0.17, lambda q: np.zeros(2), b=0.0)
    back = step_particle(fwd, -0.17, lambda q: np.zeros(2), b=0.0)
    assert np.allclose(back.position, start.position, atol=1e-15)
    assert np.array_equal(back.reduced_momentum, start.reduced_momentum)


def test_orbit_matches_reference_integration():
    state = integrate_orbit(4000)
    assert np.allclose(state.position * LAM_C, ORBIT_Q, atol=5e-10)
    assert np.allclose(state.reduced_momentum, ORBIT_G, atol=5e-10)
    assert state.gamma == pytest.approx(ORBIT_GAMMA, abs=1e-9)


def test_orbit_converges_at_fourth_order():
    err = []
    for n in (500, 1000, 2000):
        state = integrate_orbit(n)
        err.append(np.linalg.norm(state.position * LAM_C - ORBIT_Q))
    order1 = math.log2(err[0] / err[1])
    order2 = math.log2(err[1] / err[2])
    assert 3.6 < order1 < 4.4
    assert 3.6 < order2 < 4.4


def test_small_step_impulse_matches_force_law():
    # after one tiny step, delta g = (b / gamma) grad * dt (in natural time)
    grad_value = np.array([0.3, -0.7])
    g0 = np.array([0.5, 0.2])
    gam = float(gamma_of(g0))
    state = ParticleState(np.zeros(2), g0)
    dt = 1e-6
    out = step_particle(state, dt, lambda q: grad_value, b=4.0)
    expected = (4.0 / gam) * grad_value * dt * LAM_C
    assert np.allclose(out.reduced_momentum - g0, expected, rtol=1e-4)


def test_step_rejects_bad_dt():
    state = ParticleState.at_rest([0.0, 0.0])
    with pytest.raises(ValueError):
        step_particle(state, 0.0, lambda q: np.zeros(2), b=1.0)
