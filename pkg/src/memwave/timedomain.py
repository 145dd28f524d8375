"""Leapfrog evolution of the first-order system for (u, v = D_t u) with the
exponential memory term M(t, x) = int_{-inf}^t exp(-gamma (t - t')) v dt'.

The scheme, with D_t = -i d/dt and Dxx the (sign-flipped) three-point
Laplacian with frozen boundary rows:

    M_n     = exp(-gamma dt) M_{n-1} + dt v_n
    u_{n+1} = u_{n-1} + 2i dt v_n
    v_{n+1} = v_{n-1} + 2i dt (Dxx u_n + i a(x, t_n) M_n)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .core import (
    ConfigError,
    FieldState,
    Grid1D,
    MemoryAccumulator,
    PermittivityModel,
    StepPotential,
    TimeAxis,
    WavePacket,
    eval_packet,
    eval_packet_derivative,
    sample_potential,
)

MAX_CFL = 0.5
EDGE_DECAY = math.log(1e8)
STARTUPS = ("taylor2", "euler")


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimulationConfig:
    grid: Grid1D = field(default_factory=lambda: Grid1D.symmetric(math.pi, 0.01))
    time: TimeAxis = field(default_factory=lambda: TimeAxis.from_duration(3.65, 0.005))
    packet: WavePacket = field(default_factory=WavePacket)
    model: PermittivityModel = field(default_factory=PermittivityModel)
    prehistory_horizon: float = 10.0
    probe_left: float = -0.75
    probe_right: float = 0.75
    startup: str = "taylor2"
    potential_sampling: str = "pointwise"

    def __post_init__(self):
        g, R = self.grid, self.model.R
        ratio = self.time.cfl_ratio(g)
        if ratio > MAX_CFL * (1 + 1e-12):
            raise ConfigError(f"CFL: dt/dx = {ratio:.4g} exceeds the stability limit {MAX_CFL}")
        p = self.packet
        if p.x0 + p.radius >= -R:
            raise ConfigError("packet support at t=0 must lie left of -R")
        if p.x0 <= g.x_min or (g.x_min - p.x0) ** 2 / p.sigma_g < EDGE_DECAY:
            raise ConfigError("packet must have decayed below 1e-8 at the left grid edge")
        for name, xp in (("probe_left", self.probe_left), ("probe_right", self.probe_right)):
            if not g.x_min < xp < g.x_max:
                raise ConfigError(f"{name} must lie strictly inside the grid")
        if not (self.probe_left < -R and self.probe_right > R):
            raise ConfigError("probe inside support: probes must lie outside [-R, R]")
        if self.startup not in STARTUPS:
            raise ConfigError(f"startup must be one of {STARTUPS}")
        if self.prehistory_horizon <= 0:
            raise ConfigError("prehistory_horizon must be positive")
        sample_potential(self.model.potential, Grid1D(0.0, 1.0, 3), self.potential_sampling)

    @property
    def dt(self):
        return self.time.dt

    def with_model(self, model):
        return replace(self, model=model)

    def free(self):
        """Same numerics with the perturbation switched off."""
        pot = self.model.potential
        zero = StepPotential(pot.breakpoints, (0.0,) * len(pot.values))
        return replace(self, model=replace(self.model, potential=zero))

    def refined(self, factor=2):
        """Both dx and dt divided by ``factor`` on the same physical domain."""
        g = self.grid
        grid = Grid1D(g.x_min, g.dx / factor, (g.n_x - 1) * factor + 1)
        time = TimeAxis(self.time.dt / factor, (self.time.n_t - 1) * factor + 1)
        return replace(self, grid=grid, time=time)


@dataclass
class Trajectory:
    """Snapshots every ``stride`` levels, full-rate probe series, final state."""

    config: SimulationConfig
    x: np.ndarray
    V: np.ndarray
    stride: int
    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    probe_positions: tuple
    probe_u: np.ndarray
    final: FieldState
    memory: MemoryAccumulator
    peak: float
    initial_peak: float
    boundary_contact: float

    @property
    def probe_times(self):
        return self.config.time.times

    @property
    def states(self):
        return [FieldState(self.u[k], self.v[k], float(self.times[k])) for k in range(len(self.times))]


def build_laplacian_apply(grid: Grid1D):
    """Return u -> -(u[j+1] - 2u[j] + u[j-1]) / dx^2 with zero first/last rows."""
    if grid.n_x < 3:
        raise ConfigError("need n_x >= 3")
    c2 = 1.0 / grid.dx ** 2

    def apply(u):
        u = np.asarray(u)
        out = np.zeros(u.shape, dtype=np.result_type(u, 1.0))
        out[1:-1] = -(u[2:] - 2.0 * u[1:-1] + u[:-2]) * c2
        return out

    return apply


def coupling(cfg: SimulationConfig):
    """Coefficient i*V(x_j) multiplying the memory term (before the time profile)."""
    return 1j * sample_potential(cfg.model.potential, cfg.grid, cfg.potential_sampling)


def init_prehistory(cfg: SimulationConfig) -> MemoryAccumulator:
    """Trapezoidal memory integral of the free incoming wave over s in [0, H]."""
    gamma, H, dt = cfg.model.gamma, cfg.prehistory_horizon, cfg.dt
    if gamma > 0 and H < 5.0 / gamma:
        raise ConfigError(f"horizon too short: H={H} < 5/gamma={5.0 / gamma:.3g}")
    n_s = int(round(H / dt)) + 1
    p = cfg.packet
    m = kernels.prehistory_quadrature(cfg.grid.points, p.x0, p.sigma_g, p.lam, gamma, dt, n_s)
    return MemoryAccumulator(np.asarray(m), 0.0, gamma)


def initial_state(cfg: SimulationConfig) -> FieldState:
    x = cfg.grid.points
    return FieldState(eval_packet(cfg.packet, x), 1j * eval_packet_derivative(cfg.packet, x), 0.0)


def update_memory(m: MemoryAccumulator, v_n, dt) -> MemoryAccumulator:
    return MemoryAccumulator(math.exp(-m.gamma * dt) * m.m + dt * np.asarray(v_n), m.t + dt, m.gamma)


def _forcing(cfg, lap, coef, u, m, t):
    return lap(u) + coef * float(cfg.model.profile(t)) * m


def step_startup(s0: FieldState, m0: MemoryAccumulator, cfg: SimulationConfig) -> FieldState:
    """Forward Euler first step (first order)."""
    lap, coef, dt = build_laplacian_apply(cfg.grid), coupling(cfg), cfg.dt
    u1 = s0.u + 1j * dt * s0.v
    v1 = s0.v + 1j * dt * _forcing(cfg, lap, coef, s0.u, m0.m, s0.t)
    return FieldState(u1, v1, s0.t + dt)


def step_startup_taylor(s0: FieldState, m0: MemoryAccumulator, cfg: SimulationConfig) -> FieldState:
    """Second-order Taylor first step.

    Uses d_t u = i v, d_t v = i F with F = Dxx u + i a M and d_t M = v - gamma M,
    so the second derivatives are -F and -Dxx v - (a_t M + a v - gamma a M).
    """
    lap, dt = build_laplacian_apply(cfg.grid), cfg.dt
    V = sample_potential(cfg.model.potential, cfg.grid, cfg.potential_sampling)
    mdl, t, M = cfg.model, s0.t, m0.m
    a = V * float(mdl.profile(t))
    a_t = V * float(mdl.profile_rate(t))
    F = lap(s0.u) + 1j * a * M
    v_tt = -lap(s0.v) - (a_t * M + a * s0.v - mdl.gamma * a * M)
    u1 = s0.u + 1j * dt * s0.v - 0.5 * dt * dt * F
    v1 = s0.v + 1j * dt * F + 0.5 * dt * dt * v_tt
    return FieldState(u1, v1, t + dt)


def step_leapfrog(s_prev: FieldState, s_cur: FieldState, m_n: MemoryAccumulator,
                  cfg: SimulationConfig) -> FieldState:
    lap, coef, dt = build_laplacian_apply(cfg.grid), coupling(cfg), cfg.dt
    u_next = s_prev.u + 2j * dt * s_cur.v
    v_next = s_prev.v + 2j * dt * _forcing(cfg, lap, coef, s_cur.u, m_n.m, s_cur.t)
    return FieldState(u_next, v_next, s_cur.t + dt)


def cone_margin(cfg: SimulationConfig):
    """Distance between the right grid edge and the right-moving packet front at t=T."""
    p = cfg.packet
    return cfg.grid.x_max - (p.x0 + cfg.time.T + p.radius)


def check_cone(cfg: SimulationConfig):
    if cone_margin(cfg) <= 0:
        raise ConfigError(
            f"cone violation: packet front reaches the frozen boundary before T={cfg.time.T:g}"
        )


def simulate(cfg: SimulationConfig, stride: int = 4, store: bool = True) -> Trajectory:
    """Run the full scheme.  ``store=False`` keeps only probes and the final state."""
    check_cone(cfg)
    if stride < 1:
        raise ConfigError("stride must be >= 1")
    grid, nt, dt = cfg.grid, cfg.time.n_t, cfg.dt
    x = grid.points
    V = sample_potential(cfg.model.potential, grid, cfg.potential_sampling)
    coef = 1j * V

    s0 = initial_state(cfg)
    m0 = init_prehistory(cfg)
    start = step_startup_taylor if cfg.startup == "taylor2" else step_startup
    s1 = start(s0, m0, cfg)

    idx = np.array([grid.index_of(cfg.probe_left), grid.index_of(cfg.probe_right)], dtype=np.int64)
    probe_u = np.zeros((nt, 2), dtype=np.complex128)
    probe_u[0] = s0.u[idx]
    probe_u[1] = s1.u[idx]

    n_snap = -(-nt // stride) if store else 1
    snap_u = np.zeros((n_snap, grid.n_x), dtype=np.complex128)
    snap_v = np.zeros_like(snap_u)
    snap_u[0], snap_v[0] = s0.u, s0.v
    if store and stride == 1:
        snap_u[1], snap_v[1] = s1.u, s1.v

    profile = np.ascontiguousarray(cfg.model.profile(cfg.time.times), dtype=np.float64)
    initial_peak = float(np.abs(s0.u).max())
    limit = 1e6 * initial_peak
    last, peak, _, _, u_cur, v_cur, m = kernels.leapfrog_loop(
        s0.u.copy(), s0.v.copy(), s1.u.copy(), s1.v.copy(), m0.m.copy(),
        coef.astype(np.complex128), profile, math.exp(-cfg.model.gamma * dt), dt, grid.dx,
        idx, probe_u, stride if store else 0, snap_u, snap_v, limit,
    )
    peak = max(float(peak), initial_peak, float(np.abs(s1.u).max()))
    if last < nt - 1 or not np.all(np.isfinite(u_cur)):
        raise SimulationError(
            f"instability detected at t={last * dt:.4g}: max|u| exceeded 1e6 x initial max"
        )
    times = dt * stride * np.arange(n_snap) if store else np.array([0.0])
    boundary = float(max(np.abs(snap_u[:, 1]).max(), np.abs(snap_u[:, -2]).max(),
                         abs(u_cur[1]), abs(u_cur[-2]))) / max(peak, 1e-300)
    return Trajectory(
        config=cfg, x=x, V=V, stride=stride, times=times, u=snap_u, v=snap_v,
        probe_positions=(float(x[idx[0]]), float(x[idx[1]])), probe_u=probe_u,
        final=FieldState(np.asarray(u_cur), np.asarray(v_cur), (nt - 1) * dt),
        memory=MemoryAccumulator(np.asarray(m), (nt - 2) * dt, cfg.model.gamma),
        peak=peak, initial_peak=initial_peak, boundary_contact=boundary,
    )
