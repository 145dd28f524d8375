"""Shared domain types: grids, wave packets, step potentials and the
time-dependent coefficient a(x, t) = V(x) exp(-alpha_p (t - t0)^2)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """Raised when a configuration violates a physical or numerical invariant."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid x_j = x_min + j*dx, j = 0..n_x-1."""

    x_min: float
    dx: float
    n_x: int

    def __post_init__(self):
        if not self.dx > 0:
            raise ConfigError("grid spacing dx must be positive")
        if self.n_x < 3:
            raise ConfigError("grid needs at least 3 points")

    @classmethod
    def from_bounds(cls, x_min, x_max, dx):
        """Colon-style grid ``x_min:dx:x_max``; the last node may fall short of x_max."""
        if x_max <= x_min:
            raise ConfigError("x_max must exceed x_min")
        n = int(math.floor((x_max - x_min) / dx + 1e-9)) + 1
        return cls(float(x_min), float(dx), n)

    @classmethod
    def symmetric(cls, L, dx):
        return cls.from_bounds(-L, L, dx)

    @property
    def x_max(self):
        return self.x_min + (self.n_x - 1) * self.dx

    @property
    def points(self):
        return self.x_min + self.dx * np.arange(self.n_x)

    def index_of(self, x):
        """Index of the node nearest to x."""
        j = int(round((x - self.x_min) / self.dx))
        if not 0 <= j < self.n_x:
            raise ConfigError(f"position {x} lies outside the grid")
        return j


@dataclass(frozen=True)
class TimeAxis:
    dt: float
    n_t: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("time step dt must be positive")
        if self.n_t < 2:
            raise ConfigError("need at least two time levels")

    @classmethod
    def from_duration(cls, T, dt):
        return cls(float(dt), int(round(T / dt)) + 1)

    @property
    def T(self):
        return (self.n_t - 1) * self.dt

    @property
    def times(self):
        return self.dt * np.arange(self.n_t)

    def cfl_ratio(self, grid):
        return self.dt / grid.dx


@dataclass(frozen=True)
class WavePacket:
    """Gaussian packet g(x) = exp(-(x-x0)^2/sigma_g) exp(i lam (x-x0))."""

    x0: float = -2.0
    sigma_g: float = 0.05
    lam: float = 10.0

    def __post_init__(self):
        if not self.sigma_g > 0:
            raise ConfigError("sigma_g must be positive")

    @property
    def radius(self):
        """Effective support radius 6*sqrt(sigma_g)."""
        return 6.0 * math.sqrt(self.sigma_g)


@dataclass(frozen=True)
class StepPotential:
    """V(x) = values[j] on the half-open cell (breakpoints[j], breakpoints[j+1]]."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(complex(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if len(bp) != len(vals) + 1:
            raise ConfigError("need len(breakpoints) == len(values) + 1")
        if any(b1 >= b2 for b1, b2 in zip(bp, bp[1:])):
            raise ConfigError("breakpoints must be strictly increasing")

    @classmethod
    def single_barrier(cls, V0, half_width=1.0):
        return cls((-half_width, half_width), (V0,))

    @classmethod
    def zero(cls):
        return cls((-1.0, 1.0), (0.0,))

    @property
    def is_real(self):
        return all(v.imag == 0 for v in self.values)

    @property
    def extent(self):
        return max(abs(self.breakpoints[0]), abs(self.breakpoints[-1]))

    @property
    def vmax(self):
        return max(abs(v) for v in self.values)


@dataclass(frozen=True)
class PermittivityModel:
    potential: StepPotential = field(
        default_factory=lambda: StepPotential((-0.5, -0.25, 0.25, 0.5), (400.0, -50.0, 300.0))
    )
    alpha_p: float = 2.0
    t0: float = 2.0
    gamma: float = 3.0
    R: float | None = None

    def __post_init__(self):
        if self.gamma < 0:
            raise ConfigError("gamma must be nonnegative")
        if self.alpha_p < 0:
            raise ConfigError("alpha_p must be nonnegative")
        if self.R is None:
            object.__setattr__(self, "R", self.potential.extent)
        if self.R <= 0:
            raise ConfigError("R must be positive")
        if self.potential.extent > self.R * (1 + 1e-12):
            raise ConfigError("potential support must lie inside [-R, R]")

    def profile(self, t):
        """Gaussian time profile exp(-alpha_p (t - t0)^2)."""
        return np.exp(-self.alpha_p * (np.asarray(t, dtype=float) - self.t0) ** 2)

    def profile_rate(self, t):
        """d/dt of the time profile."""
        t = np.asarray(t, dtype=float)
        return -2.0 * self.alpha_p * (t - self.t0) * self.profile(t)


@dataclass
class FieldState:
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.u.shape != self.v.shape:
            raise ValueError("u and v must have the same shape")


@dataclass
class MemoryAccumulator:
    m: np.ndarray
    t: float = 0.0
    gamma: float = 0.0


def eval_packet(p: WavePacket, x):
    y = np.asarray(x, dtype=float) - p.x0
    return np.exp(-(y * y) / p.sigma_g) * np.exp(1j * p.lam * y)


def eval_packet_derivative(p: WavePacket, x):
    y = np.asarray(x, dtype=float) - p.x0
    return (-2.0 * y / p.sigma_g + 1j * p.lam) * eval_packet(p, x)


def eval_potential(v: StepPotential, x):
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex)
    bp = v.breakpoints
    for j, val in enumerate(v.values):
        out[(x > bp[j]) & (x <= bp[j + 1])] = val
    return out if out.ndim else complex(out)


def cell_average_potential(v: StepPotential, grid: Grid1D):
    """Average of V over [x_j - dx/2, x_j + dx/2] at every node.

    Nodes away from a jump get the pointwise value; nodes next to a jump
    get the length-weighted mean, which removes the O(dx) offset of the
    pointwise sampling in the effective barrier edges.
    """
    x = grid.points
    lo, hi = x - grid.dx / 2, x + grid.dx / 2
    out = np.zeros(x.shape, dtype=complex)
    bp = v.breakpoints
    for j, val in enumerate(v.values):
        overlap = np.clip(np.minimum(hi, bp[j + 1]) - np.maximum(lo, bp[j]), 0.0, None)
        out += val * overlap / grid.dx
    return out


def sample_potential(v: StepPotential, grid: Grid1D, mode="pointwise"):
    if mode == "pointwise":
        return eval_potential(v, grid.points)
    if mode == "cell_average":
        return cell_average_potential(v, grid)
    raise ConfigError(f"unknown potential sampling {mode!r}")


def eval_a(m: PermittivityModel, x, t):
    return eval_potential(m.potential, x) * m.profile(t)
