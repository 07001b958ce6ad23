"""Coupled particle-field time integration and scenario handling.

The field state, particle state, and the interaction all advance in one
RK4 step so the semi-discrete momentum balance closes to roundoff.  The
force uses the same Gaussian-filtered field samples that define the
source, which is what makes the exchange exact.

Kicks prescribe the reduced momentum over a ramp window that is snapped
to whole steps; while a ramp is active the coupling is suspended, so the
impulse delivered to the system is exactly the momentum written into the
particle and budgets open cleanly at the ramp end.

The configured coupling b is quoted on the scale of the amplitude fits
(virtual mass fraction (b / 163.8)^2); the engine multiplies it by
SOURCE_CALIBRATION to get the raw source amplitude that realizes that
fraction with the default source width.
"""
from __future__ import annotations

import math
import os
import time as _time
from dataclasses import dataclass, replace

import numpy as np

from .field_core import (
    FieldBlowupError,
    FieldState,
    GridSpec,
    field_angular_momentum,
    field_energy,
    field_momentum,
)
from .particle_core import CouplingParams, ParticleState, kick_momentum

SOURCE_CALIBRATION = 0.105609495921

SCENARIO_KINDS = ("rest-kick", "boosted-kick", "stationary", "free-ballistic")
INITIAL_FIELDS = ("zero", "static-profile", "from-snapshot-file")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    """What the particle does: kind, target velocity, kick scheduling.

    Times are in Compton periods.  rest-kick ramps the particle from rest
    to u0 starting at kick_time; boosted-kick starts already moving at u0
    with no scheduled kick.  restore > 0 fades the coupling back in over
    that many periods after a ramp instead of instantly.  A second kick
    (an additional impulse toward second_u0 at second_time, same ramp
    length) can be requested from the API for either kind.
    """

    kind: str
    u0: tuple[float, float] = (0.0, 0.0)
    kick_time: float = 0.0
    ramp: float = 0.5
    restore: float = 2.0
    second_u0: tuple[float, float] | None = None
    second_time: float = -1.0

    def __post_init__(self) -> None:
        if self.kind not in SCENARIO_KINDS:
            raise ConfigError(
                f"unknown scenario kind {self.kind!r}; expected one of {SCENARIO_KINDS}"
            )
        if math.hypot(*self.u0) >= 1.0:
            raise ConfigError(f"scenario speed |u0| = {math.hypot(*self.u0):.4g} must be < 1")
        if self.kind == "rest-kick" and self.kick_time < 0.0:
            raise ConfigError("rest-kick needs kick_time >= 0")
        if self.ramp < 0.0:
            raise ConfigError("ramp must be >= 0")
        if self.restore < 0.0:
            raise ConfigError("restore must be >= 0")
        if self.second_u0 is not None:
            if math.hypot(*self.second_u0) >= 1.0:
                raise ConfigError("second kick speed must be < 1")
            if self.second_time < 0.0:
                raise ConfigError("second kick needs second_time >= 0")
            if self.kind == "rest-kick" and self.second_time < self.kick_time + self.ramp:
                raise ConfigError("second kick must start after the first ramp ends")


@dataclass(frozen=True)
class SimConfig:
    grid: GridSpec
    params: CouplingParams
    scenario: Scenario
    dt: float = 0.004
    duration: float = 16.0
    traj_stride: int = 5
    budget_stride: int = 10
    snapshot_every: float = 0.0
    initial_field: str = "zero"
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.dt <= 0.0 or self.duration <= 0.0:
            raise ConfigError("dt and duration must be positive")
        if self.traj_stride < 1 or self.budget_stride < 1:
            raise ConfigError("record strides must be >= 1")
        if self.budget_stride % self.traj_stride != 0:
            raise ConfigError("budget stride must be a multiple of the trajectory stride")
        if self.snapshot_every < 0.0:
            raise ConfigError("snapshot_every must be >= 0")
        if self.params.b < 0.0:
            raise ConfigError("coupling b must be >= 0")
        if self.initial_field not in INITIAL_FIELDS:
            raise ConfigError(
                f"initial_field {self.initial_field!r} not one of {INITIAL_FIELDS}"
            )

    def validate(self) -> None:
        bound = self.grid.max_stable_dt()
        if self.dt > bound:
            raise ConfigError(
                f"time.dt = {self.dt} exceeds the stability bound "
                f"{bound:.6g} Compton periods for grid.n = {self.grid.n}, "
                f"grid.length = {self.grid.length}"
            )
        sc = self.scenario
        if sc.kind == "rest-kick" and sc.kick_time + sc.ramp > self.duration:
            raise ConfigError("kick schedule does not fit inside the duration")
        if sc.second_u0 is not None and sc.second_time + sc.ramp > self.duration:
            raise ConfigError("second kick does not fit inside the duration")


@dataclass
class RestartPoint:
    field_state: FieldState
    particle: ParticleState
    step: int
    exchange: float = 0.0
    kick_bases: tuple[tuple[float, float] | None, ...] | None = None


@dataclass
class RunOutput:
    config: SimConfig
    grid: GridSpec
    trajectory: dict[str, np.ndarray]
    budgets: dict[str, np.ndarray]
    snapshots: list[tuple[float, FieldState, ParticleState]]
    final_field: FieldState
    final_particle: ParticleState
    final_step: int
    exchange_total: float
    kick_bases: tuple[tuple[float, float] | None, ...] | None = None
    wall_time: float = 0.0


TRAJ_COLUMNS = ("t", "x", "y", "g_x", "g_y", "gradphi_x", "gradphi_y", "phi")
BUDGET_COLUMNS = (
    "t",
    "e_field",
    "e_particle",
    "p_field_x",
    "p_field_y",
    "p_particle_x",
    "p_particle_y",
    "l_field",
    "exchange_rate",
    "exchange_cum",
)


class _Kick:
    """One scheduled impulse: prescribed g over [step, step + n_ramp]."""

    def __init__(self, step: int, n_ramp: int, dg: np.ndarray, h: float):
        self.step = step
        self.n_ramp = n_ramp
        self.dg = dg
        self.t_start = step * h
        self.t_end = (step + n_ramp) * h
        self.ramp_len = max(n_ramp, 1) * h
        self.base: np.ndarray | None = None


def _kick_schedule(config: SimConfig) -> list[_Kick]:
    sc = config.scenario
    h = config.dt * config.grid.period_c
    kicks: list[_Kick] = []

    def add(t_periods: float, u_target) -> None:
        step = int(round(t_periods / config.dt))
        n_ramp = max(1, int(round(sc.ramp / config.dt))) if sc.ramp > 0.0 else 0
        kicks.append(_Kick(step, n_ramp, kick_momentum(u_target), h))

    if sc.kind == "rest-kick":
        add(sc.kick_time, sc.u0)
    if sc.second_u0 is not None and sc.kind in ("rest-kick", "boosted-kick"):
        add(sc.second_time, sc.second_u0)
    return kicks


def steady_packet_state(
    grid: GridSpec,
    particle: ParticleState,
    amplitude: float,
    variance: float | None = None,
) -> FieldState:
    """Closed-form co-moving equilibrium field of a uniformly moving
    source on this grid: phi_hat = S_hat / (k^2 + m^2 - (k.u)^2)."""
    var = grid.default_variance() if variance is None else variance
    gam = particle.gamma
    u = particle.velocity
    qx = particle.position[0] * grid.lam_c
    qy = particle.position[1] * grid.lam_c
    ax = np.exp(-0.5 * var * grid.kx**2 - 1j * grid.kx * qx)
    ay = np.exp(-0.5 * var * grid.ky**2 - 1j * grid.ky * qy)
    s_hat = (amplitude / (grid.m * gam) / grid.cell) * np.outer(ax, ay)
    k_dot_u = grid.kx[:, None] * u[0] + grid.ky[None, :] * u[1]
    phi_hat = s_hat / (grid.omega2 - k_dot_u**2)
    eta_hat = -1j * k_dot_u * phi_hat
    return FieldState(grid, phi_hat, eta_hat)


def _initial_state(
    config: SimConfig, beff: float, var: float
) -> tuple[FieldState, ParticleState]:
    grid = config.grid
    sc = config.scenario
    center = [config.grid.length / 2.0, config.grid.length / 2.0]
    start = [config.grid.length / 4.0, config.grid.length / 2.0]
    if sc.kind == "stationary":
        particle = ParticleState.at_rest(center)
    elif sc.kind == "free-ballistic":
        particle = ParticleState(center, kick_momentum(sc.u0))
    elif sc.kind == "rest-kick":
        particle = ParticleState.at_rest(start)
    else:
        particle = ParticleState(start, kick_momentum(sc.u0))
    if config.initial_field == "static-profile":
        return steady_packet_state(grid, particle, beff, var), particle
    return FieldState.zero(grid), particle


def default_config(
    n: int = 256,
    length: float = 16.0,
    m: float = 1.0,
    b: float = 53.3,
    scenario: Scenario | None = None,
    **kwargs,
) -> SimConfig:
    """Convenience constructor mirroring the config-file defaults."""
    if scenario is None:
        scenario = Scenario(kind="rest-kick", u0=(0.35, 0.0))
    if scenario.kind == "boosted-kick":
        kwargs.setdefault("initial_field", "static-profile")
    return SimConfig(
        grid=GridSpec(n, length, m),
        params=CouplingParams(b=b),
        scenario=scenario,
        **kwargs,
    )


def run(
    config: SimConfig,
    initial: RestartPoint | None = None,
    initial_field_state: FieldState | None = None,
) -> RunOutput:
    """Integrate the configured scenario and return the recorded series.

    `initial` continues a previous run from its saved state with the
    recording grid kept aligned to the global step index, so a split run
    reproduces an uninterrupted one.  `initial_field_state` supplies the
    starting field when initial_field = "from-snapshot-file".
    """
    config.validate()
    t_wall = _time.perf_counter()
    grid = config.grid
    sc = config.scenario
    m = grid.m
    lam_c = grid.lam_c
    t_c = grid.period_c
    var = (
        config.params.source_variance
        if config.params.source_variance is not None
        else grid.default_variance()
    )
    beff = 0.0 if sc.kind == "free-ballistic" else SOURCE_CALIBRATION * config.params.b

    n = grid.n
    kx, ky = grid.kx, grid.ky
    om2 = grid.omega2
    wgt = grid.weights
    cell = grid.cell
    gauss = np.exp(-0.5 * var * grid.k2)
    h = config.dt * t_c
    norm = 1.0 / (n * n)
    kicks = _kick_schedule(config)

    n_steps = int(round(config.duration / config.dt))
    if initial is not None:
        step0 = initial.step
        exchange = initial.exchange
        if initial.kick_bases is not None:
            for kk, base in zip(kicks, initial.kick_bases):
                kk.base = np.asarray(base, float) if base is not None else None
        ph = initial.field_state.phi_hat.astype(complex, copy=True)
        et = initial.field_state.eta_hat.astype(complex, copy=True)
        q = initial.particle.position * lam_c
        g = initial.particle.reduced_momentum.copy()
    else:
        if config.initial_field == "from-snapshot-file":
            if initial_field_state is None:
                raise ConfigError(
                    "initial_field = from-snapshot-file needs a loaded field state"
                )
            field_state = initial_field_state
            _, particle = _initial_state(config, beff, var)
        else:
            field_state, particle = _initial_state(config, beff, var)
        step0 = 0
        exchange = 0.0
        ph = field_state.phi_hat.astype(complex, copy=True)
        et = field_state.eta_hat.astype(complex, copy=True)
        q = particle.position * lam_c
        g = particle.reduced_momentum.copy()

    def src_hat(qp, gam):
        ax = np.exp(-0.5 * var * kx**2 - 1j * kx * qp[0])
        ay = np.exp(-0.5 * var * ky**2 - 1j * ky * qp[1])
        return (beff / (m * gam) / cell) * np.outer(ax, ay)

    def filtered_grad(hat, qp):
        wx = np.exp(1j * kx * qp[0])
        wy = np.exp(1j * ky * qp[1])
        w = hat * gauss
        colx = w @ (wgt * wy)
        coly = w @ (wgt * wy * (1j * ky))
        gx = float(np.real((colx * (1j * kx)) @ wx)) * norm
        gy = float(np.real(coly @ wx)) * norm
        return np.array([gx, gy])

    def filtered_value(hat, qp):
        wx = np.exp(1j * kx * qp[0])
        wy = np.exp(1j * ky * qp[1])
        col = (hat * gauss) @ (wgt * wy)
        return float(np.real(col @ wx)) * norm

    def filtered_value_grad(hat, qp):
        wx = np.exp(1j * kx * qp[0])
        wy = np.exp(1j * ky * qp[1])
        w = hat * gauss
        col = w @ (wgt * wy)
        coly = w @ (wgt * wy * (1j * ky))
        value = float(np.real(col @ wx)) * norm
        gx = float(np.real((col * (1j * kx)) @ wx)) * norm
        gy = float(np.real(coly @ wx)) * norm
        return value, np.array([gx, gy])

    restore_nat = sc.restore * t_c

    def coupling_scale(tt) -> float:
        # 0 while a ramp is prescribing the momentum, then a smooth
        # cosine restore so the freshly dressed state radiates de
        # Broglie waves instead of a broadband turn-on shock; force and
        # source share the factor, so the balance laws hold throughout
        if beff == 0.0:
            return 0.0
        scale = 1.0
        for kk in kicks:
            if kk.n_ramp > 0 and kk.t_start - 1e-12 <= tt < kk.t_end - 1e-12:
                return 0.0
            if restore_nat > 0.0 and kk.t_end - 1e-12 <= tt < kk.t_end + restore_nat - 1e-12:
                frac = (tt - kk.t_end) / restore_nat
                scale = min(scale, 0.5 - 0.5 * math.cos(math.pi * frac))
        return scale

    def ramped(gv, tt):
        for kk in kicks:
            if (
                kk.n_ramp > 0
                and kk.base is not None
                and kk.t_start - 1e-12 <= tt < kk.t_end - 1e-12
            ):
                frac = min((tt - kk.t_start) / kk.ramp_len, 1.0)
                return kk.base + frac * kk.dg
        return gv

    def rhs(ph_s, et_s, q_s, g_s, tt):
        gam = math.sqrt(1.0 + float(g_s @ g_s))
        dph = et_s
        scale = coupling_scale(tt)
        if scale != 0.0:
            det = -om2 * ph_s + scale * src_hat(q_s, gam)
            dg = (scale * beff / gam) * filtered_grad(ph_s, q_s)
        else:
            det = -om2 * ph_s
            dg = np.zeros(2)
        dq = g_s / gam
        return dph, det, dq, dg

    def exchange_rate(tt):
        # energy flow into the interaction per natural time; its running
        # integral balances the particle + field budget
        scale = coupling_scale(tt)
        if scale == 0.0:
            return 0.0
        gam = math.sqrt(1.0 + float(g @ g))
        u = g / gam
        eta_s = filtered_value(et, q)
        grad_s = filtered_grad(ph, q)
        return -(m * beff * scale / gam) * (eta_s + float(u @ grad_s))

    traj_rows: list[tuple] = []
    budget_rows: list[tuple] = []
    snapshots: list[tuple[float, FieldState, ParticleState]] = []
    snap_stride = (
        max(1, int(round(config.snapshot_every / config.dt)))
        if config.snapshot_every > 0.0
        else 0
    )

    def record(step: int, rate_now: float) -> None:
        t_per = step * config.dt
        gam = math.sqrt(1.0 + float(g @ g))
        if step % config.traj_stride == 0:
            value, grad = filtered_value_grad(ph, q)
            traj_rows.append(
                (t_per, q[0] / lam_c, q[1] / lam_c, g[0], g[1], grad[0], grad[1], value)
            )
        if step % config.budget_stride == 0:
            state = FieldState(grid, ph, et, t_per)
            e_f = field_energy(state)
            p_f = field_momentum(state)
            l_f = field_angular_momentum(state)
            budget_rows.append(
                (
                    t_per,
                    e_f,
                    m * gam,
                    p_f[0],
                    p_f[1],
                    m * g[0],
                    m * g[1],
                    l_f,
                    rate_now * t_c,
                    exchange,
                )
            )
        if snap_stride and step > 0 and step % snap_stride == 0:
            snapshots.append(
                (
                    t_per,
                    FieldState(grid, ph.copy(), et.copy(), t_per),
                    ParticleState(q / lam_c, g.copy()),
                )
            )

    rate_prev = exchange_rate(step0 * h)
    if initial is None:
        record(0, rate_prev)

    for i in range(step0, n_steps):
        t = i * h
        for kk in kicks:
            if i == kk.step and kk.base is None:
                kk.base = g.copy()
                if kk.n_ramp == 0:
                    g = g + kk.dg
        s_ph, s_et, s_q, s_g = ph, et, q, g
        k1 = rhs(s_ph, s_et, s_q, ramped(s_g, t), t)
        k2 = rhs(
            s_ph + 0.5 * h * k1[0],
            s_et + 0.5 * h * k1[1],
            s_q + 0.5 * h * k1[2],
            ramped(s_g + 0.5 * h * k1[3], t + 0.5 * h),
            t + 0.5 * h,
        )
        k3 = rhs(
            s_ph + 0.5 * h * k2[0],
            s_et + 0.5 * h * k2[1],
            s_q + 0.5 * h * k2[2],
            ramped(s_g + 0.5 * h * k2[3], t + 0.5 * h),
            t + 0.5 * h,
        )
        k4 = rhs(
            s_ph + h * k3[0],
            s_et + h * k3[1],
            s_q + h * k3[2],
            ramped(s_g + h * k3[3], t + h),
            t + h,
        )
        ph = s_ph + (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        et = s_et + (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        q = s_q + (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        g = s_g + (h / 6.0) * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
        t_next = (i + 1) * h
        for kk in kicks:
            if kk.n_ramp > 0 and kk.step < i + 1 <= kk.step + kk.n_ramp:
                base = kk.base if kk.base is not None else np.zeros(2)
                frac = min((t_next - kk.t_start) / kk.ramp_len, 1.0)
                g = base + frac * kk.dg

        rms = math.sqrt(float(np.sum(wgt * (ph.real**2 + ph.imag**2)))) * norm
        if not math.isfinite(rms) or rms > 1.0e6:
            raise FieldBlowupError(
                f"field rms {rms:.3g} blew up at step {i + 1} (t = {t_next / t_c:.4g})"
            )

        rate_now = exchange_rate(t_next)
        exchange += 0.5 * (rate_prev + rate_now) * h
        rate_prev = rate_now
        record(i + 1, rate_now)

    trajectory = {
        name: np.array([row[j] for row in traj_rows])
        for j, name in enumerate(TRAJ_COLUMNS)
    }
    budgets = {
        name: np.array([row[j] for row in budget_rows])
        for j, name in enumerate(BUDGET_COLUMNS)
    }
    final_t = n_steps * config.dt
    return RunOutput(
        config=config,
        grid=grid,
        trajectory=trajectory,
        budgets=budgets,
        snapshots=snapshots,
        final_field=FieldState(grid, ph, et, final_t),
        final_particle=ParticleState(q / lam_c, g),
        final_step=n_steps,
        exchange_total=exchange,
        kick_bases=tuple(
            tuple(kk.base) if kk.base is not None else None for kk in kicks
        )
        or None,
        wall_time=_time.perf_counter() - t_wall,
    )


def relax_static(
    config: SimConfig,
    tol: float = 1.0e-4,
    max_periods: float = 200.0,
    damp_every: int = 5,
    damping_rate: float = 1.0,
) -> FieldState:
    """Damped evolution with the particle clamped at the domain center
    until the field profile stops changing; far-zone masking plus a weak
    global decay of the field rate remove the transients.  Both act only
    on the rate, whose fixed point is zero, so the converged profile
    solves the undamped static equation.  Needs a stationary scenario.

    The returned state's time records how many periods it took."""
    config.validate()
    if config.scenario.kind != "stationary":
        raise ConfigError("relax_static needs a stationary scenario")
    grid = config.grid
    m = grid.m
    var = (
        config.params.source_variance
        if config.params.source_variance is not None
        else grid.default_variance()
    )
    beff = SOURCE_CALIBRATION * config.params.b
    n = grid.n
    om2 = grid.omega2
    h = config.dt * grid.period_c

    center = np.array([grid.side / 2.0, grid.side / 2.0])
    ax = np.exp(-0.5 * var * grid.kx**2 - 1j * grid.kx * center[0])
    ay = np.exp(-0.5 * var * grid.ky**2 - 1j * grid.ky * center[1])
    s_hat = (beff / m / grid.cell) * np.outer(ax, ay)

    coords = np.arange(n) * grid.dx
    rad = np.hypot(coords[:, None] - center[0], coords[None, :] - center[1])
    rolloff = np.clip((rad - 0.4 * grid.side) / (0.1 * grid.side), 0.0, 1.0)
    damp_mask = 1.0 - 0.5 * np.sin(0.5 * math.pi * rolloff) ** 2

    ph = np.zeros((n, n // 2 + 1), complex)
    et = np.zeros_like(ph)
    steps_per_period = max(1, int(round(1.0 / config.dt)))
    decay = math.exp(-damping_rate * m * h)
    prev_profile = None
    periods = 0
    converged = False
    while periods < max_periods:
        for i in range(steps_per_period):
            k1p, k1e = et, -om2 * ph + s_hat
            k2p = et + 0.5 * h * k1e
            k2e = -om2 * (ph + 0.5 * h * k1p) + s_hat
            k3p = et + 0.5 * h * k2e
            k3e = -om2 * (ph + 0.5 * h * k2p) + s_hat
            k4p = et + h * k3e
            k4e = -om2 * (ph + h * k3p) + s_hat
            ph = ph + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            et = (et + (h / 6.0) * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)) * decay
            if (i + 1) % damp_every == 0:
                et = np.fft.rfft2(np.fft.irfft2(et, s=(n, n)) * damp_mask)
        periods += 1
        profile = np.fft.irfft2(ph, s=(n, n))
        if prev_profile is not None:
            change = np.max(np.abs(profile - prev_profile)) / np.max(np.abs(profile))
            if change < tol:
                converged = True
                break
        prev_profile = profile
    if not converged:
        raise RuntimeError(
            f"relaxation did not converge below {tol} within {max_periods} periods"
        )

    t_final = periods * steps_per_period * config.dt
    return FieldState(grid, ph, et, t_final)


def _sweep_worker(config: SimConfig) -> RunOutput | Exception:
    try:
        return run(config)
    except Exception as exc:  # noqa: BLE001 - reported to the caller per run
        return exc


def sweep(configs, workers: int | None = None) -> list[RunOutput | Exception]:
    """Run a batch of configs; worker count from PWSIM_THREADS (default
    one process per CPU), each run independent and reproducible.

    A failing run does not abort the batch: its slot carries the
    exception instead of a RunOutput."""
    configs = list(configs)
    if workers is None:
        env = os.environ.get("PWSIM_THREADS", "").strip()
        workers = int(env) if env else (os.cpu_count() or 1)
    workers = max(1, min(workers, len(configs) or 1))
    if workers == 1:
        return [_sweep_worker(c) for c in configs]
    import multiprocessing as mp

    with mp.get_context("spawn").Pool(workers) as pool:
        return pool.map(_sweep_worker, configs)
