"""Stationary construction of the operator-valued coefficients T f and R+ f.

On a position/frequency lattice (x_j, zeta_k = omega_k + i sigma):

* R0        outgoing free resolvent, kernel (i / 2 zeta) exp(i zeta |x - y|)
* A         memory operator: multiply by zeta/(zeta + i gamma), convolve in
            frequency against a^(x, .)/(2 pi), where a^ is the time transform
            of a(x, t) = V(x) exp(-alpha_p (t - t0)^2)
* F         commutator source f(zeta) [Dxx, rho] exp(i zeta x)
* w         solution of (I + A R0 rho1) w = rho1 F   (matrix-free GMRES)

    T f    = f + (i / 2 zeta) int exp(-i zeta y) w(y) dy
    R+ f   =     (i / 2 zeta) int exp( i zeta y) w(y) dy

A classical transfer-matrix solver for time-independent step potentials is
included as an analytic oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve as dense_solve
from scipy.sparse.linalg import LinearOperator, gmres
from scipy.special import erfc

from . import kernels
from .core import ConfigError, Grid1D, PermittivityModel, StepPotential, eval_potential, sample_potential
from .scattering import Spectrum

KERNEL_TAIL = 1e-12
TRUNCATION_TOL = 1e-8
DENSE_LIMIT = 2000


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class FrequencyLine:
    sigma: float = 0.5
    omega_max: float = 80.0
    n_omega: int = 256
    epsilon: float = 1e-3
    regularize: bool = False

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigError("sigma must be >= 0")
        if self.n_omega % 2:
            raise ConfigError("n_omega must be even")
        if self.omega_max <= 0:
            raise ConfigError("omega_max must be positive")

    @property
    def omega(self):
        return np.linspace(-self.omega_max, self.omega_max, self.n_omega)

    @property
    def d_omega(self):
        return 2.0 * self.omega_max / (self.n_omega - 1)

    @property
    def zeta(self):
        """Samples used in the 1/zeta factors (shifted by i*epsilon if sigma=0 and regularized)."""
        shift = self.sigma
        if self.sigma < self.epsilon:
            if not self.regularize:
                raise SolverError("omega too close to zero: use sigma > 0 or enable regularize")
            shift = max(self.sigma, self.epsilon)
        return self.omega + 1j * shift


def _smoothstep(s):
    """C-infinity step from 0 (s<=0) to 1 (s>=1) and its first two derivatives."""
    s = np.asarray(s, dtype=float)
    S = np.where(s >= 1.0, 1.0, 0.0)
    d1 = np.zeros_like(s)
    d2 = np.zeros_like(s)
    inner = (s > 0) & (s < 1)
    if inner.any():
        t = s[inner]
        u = 1.0 - t
        with np.errstate(over="ignore"):
            Si = 1.0 / (1.0 + np.exp(1.0 / t - 1.0 / u))
        q = Si * (1.0 - Si)
        P = 1.0 / t ** 2 + 1.0 / u ** 2
        dlogq = 1.0 / t ** 2 - 1.0 / u ** 2 - 2.0 * (Si / t ** 2 - (1.0 - Si) / u ** 2)
        dP = -2.0 / t ** 3 + 2.0 / u ** 3
        S[inner] = Si
        d1[inner] = q * P
        d2[inner] = q * (P * dlogq + dP)
    return S, d1, d2


def plateau(x, inner, outer):
    """Even cutoff: 1 for |x| <= inner, 0 for |x| >= outer.  Returns (f, f', f'')."""
    x = np.asarray(x, dtype=float)
    w = outer - inner
    S, d1, d2 = _smoothstep((np.abs(x) - inner) / w)
    return 1.0 - S, -np.sign(x) * d1 / w, -d2 / w ** 2


@dataclass(frozen=True)
class CutoffPair:
    """rho = 1 on |x| <= R + delta and falls to 0 by R + 3.5 delta; rho1 = 1 on
    supp rho and vanishes beyond R + 3.9 delta, with delta = (R1 - R)/4.

    The wide rho transition keeps the trapezoid sums over rho', rho'' accurate
    to near machine precision; the shape of rho1 is immaterial because the
    Fredholm solution is supported where rho1 = 1."""

    R: float
    R1: float

    def __post_init__(self):
        if not self.R1 > self.R > 0:
            raise ConfigError("need R1 > R > 0")

    @property
    def delta(self):
        return (self.R1 - self.R) / 4.0

    def rho(self, x):
        d = self.delta
        return plateau(x, self.R + d, self.R + 3.5 * d)

    def rho1(self, x):
        d = self.delta
        return plateau(x, self.R + 3.5 * d, self.R + 3.9 * d)[0]


def lattice(cut: CutoffPair, dx):
    """Symmetric x lattice j*dx covering [-R1, R1]; nodes align across cutoff pairs."""
    n = int(math.ceil(cut.R1 / dx - 1e-9))
    return Grid1D(-n * dx, dx, 2 * n + 1)


def _weights(grid: Grid1D):
    w = np.full(grid.n_x, grid.dx)
    w[0] = w[-1] = 0.5 * grid.dx
    return w


def free_resolvent_apply(f, line: FrequencyLine, grid: Grid1D):
    """(i / 2 zeta) int exp(i zeta |x - y|) f(y, zeta) dy for every lattice column."""
    zeta = line.zeta
    hw = np.ascontiguousarray(_weights(grid)[:, None] * np.asarray(f, dtype=complex))
    return kernels.resolvent_sweep(hw, zeta, grid.dx)


def free_resolvent_dense(f, line: FrequencyLine, grid: Grid1D):
    """O(n_x^2) reference version of :func:`free_resolvent_apply`."""
    x, zeta = grid.points, line.zeta
    D = np.abs(x[:, None] - x[None, :])
    hw = _weights(grid)[:, None] * np.asarray(f, dtype=complex)
    out = np.empty_like(hw)
    for k, z in enumerate(zeta):
        out[:, k] = (0.5j / z) * (np.exp(1j * z * D) @ hw[:, k])
    return out


def hat_a(model: PermittivityModel, x, tau):
    """Time transform int a(x, t) exp(i tau t) dt of the Gaussian profile."""
    if model.alpha_p <= 0:
        raise ConfigError("hat_a needs alpha_p > 0; a time-constant symbol is a delta")

    al = model.alpha_p
    tau = np.asarray(tau, dtype=float)
    return (np.asarray(eval_potential(model.potential, x))
            * math.sqrt(math.pi / al) * np.exp(-tau ** 2 / (4 * al)) * np.exp(1j * tau * model.t0))


def truncation_radius(alpha_p, tail=KERNEL_TAIL):
    """tau_max with exp(-tau_max^2 / (4 alpha_p)) = tail."""
    return math.sqrt(4.0 * alpha_p * math.log(1.0 / tail))


def convolution_matrix(model: PermittivityModel, line: FrequencyLine):
    """Banded Toeplitz matrix C with (C u)_k ~ (1/2pi) int p^(omega_k - l) u(l) dl.

    p^ is the transform of the time profile alone; V(x) is applied per row.
    """
    al = model.alpha_p
    om, dw = line.omega, line.d_omega
    tau_max = truncation_radius(al)
    reach = min(tau_max, om[-1] - om[0])
    kept = erfc(reach / (2.0 * math.sqrt(al)))
    if kept > TRUNCATION_TOL:
        raise SolverError(
            f"convolution kernel truncated above tolerance: discarded mass {kept:.2e}"
        )
    tau = om[:, None] - om[None, :]
    C = (math.sqrt(math.pi / al) / (2 * math.pi)) * np.exp(-tau ** 2 / (4 * al)) * np.exp(1j * tau * model.t0)
    C[np.abs(tau) > tau_max] = 0.0
    w = np.full(line.n_omega, dw)
    w[0] = w[-1] = 0.5 * dw
    return C * w[None, :]


class MemoryOperator:
    """Lattice action of A; rows with V = 0 are skipped."""

    def __init__(self, model: PermittivityModel, line: FrequencyLine, grid: Grid1D,
                 potential_sampling="pointwise"):
        self.model, self.line, self.grid = model, line, grid
        self.V = sample_potential(model.potential, grid, potential_sampling)
        self.rows = np.nonzero(self.V)[0]
        zeta = line.zeta
        self.mult = zeta / (zeta + 1j * model.gamma)
        self.C = None if model.alpha_p == 0 else convolution_matrix(model, line)

    def __call__(self, u):
        out = np.zeros_like(u, dtype=complex)
        if self.rows.size == 0:
            return out
        r = u[self.rows] * self.mult[None, :]
        if self.C is not None:
            r = r @ self.C.T
        out[self.rows] = self.V[self.rows, None] * r
        return out


def apply_A(u, model, line, grid, potential_sampling="pointwise"):
    return MemoryOperator(model, line, grid, potential_sampling)(u)


def commutator_source(f, cut: CutoffPair, grid: Grid1D, line: FrequencyLine):
    """F(x, zeta) = f(zeta) (-rho'' - 2 i zeta rho') exp(i zeta x)."""
    x, zeta = grid.points, line.zeta
    _, r1, r2 = cut.rho(x)
    f = np.asarray(f, dtype=complex)
    return f[None, :] * (-r2[:, None] - 2j * zeta[None, :] * r1[:, None]) * np.exp(1j * np.outer(x, zeta))


@dataclass
class FredholmSolution:
    w: np.ndarray
    iterations: int
    residual: float
    support_defect: float


def _system(model, cut, line, grid, potential_sampling):
    A = MemoryOperator(model, line, grid, potential_sampling)
    rho1 = cut.rho1(grid.points)
    shape = (grid.n_x, line.n_omega)

    def matvec(wflat):
        w = wflat.reshape(shape)
        return (w + A(free_resolvent_apply(rho1[:, None] * w, line, grid))).ravel()

    return matvec, rho1, shape


def solve_fredholm(F, model: PermittivityModel, cut: CutoffPair, line: FrequencyLine,
                   grid: Grid1D, tol=1e-8, restart=50, max_iter=2000,
                   potential_sampling="pointwise") -> FredholmSolution:
    """Matrix-free GMRES for (I + A R0 rho1) w = rho1 F."""
    matvec, rho1, shape = _system(model, cut, line, grid, potential_sampling)
    n = shape[0] * shape[1]
    op = LinearOperator((n, n), matvec=matvec, dtype=complex)
    b = (rho1[:, None] * F).ravel()
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return FredholmSolution(np.zeros(shape, complex), 0, 0.0, 0.0)
    count = [0]

    def tick(_):
        count[0] += 1

    w, info = gmres(op, b, rtol=tol, atol=0.0, restart=restart, maxiter=max_iter,
                    callback=tick, callback_type="pr_norm")
    res = float(np.linalg.norm(matvec(w) - b) / bnorm)
    if info != 0 or res > 10 * tol:
        raise SolverError(f"no convergence in max_iter (info={info}, residual={res:.2e})")
    w = w.reshape(shape)
    defect = float(np.abs(w - rho1[:, None] * w).max() / max(np.abs(w).max(), 1e-300))
    return FredholmSolution(w, count[0], res, defect)


def solve_fredholm_dense(F, model, cut, line, grid, potential_sampling="pointwise"):
    """Assemble the lattice operator column by column (tiny problems only)."""
    matvec, rho1, shape = _system(model, cut, line, grid, potential_sampling)
    n = shape[0] * shape[1]
    if n > DENSE_LIMIT:
        raise ConfigError(f"dense debug solve limited to {DENSE_LIMIT} unknowns")
    M = np.empty((n, n), dtype=complex)
    e = np.zeros(n, dtype=complex)
    for j in range(n):
        e[j] = 1.0
        M[:, j] = matvec(e)
        e[j] = 0.0
    b = (rho1[:, None] * F).ravel()
    return dense_solve(M, b).reshape(shape), M


@dataclass
class ScatteringOutput:
    T_of_f: Spectrum
    Rplus_of_f: Spectrum
    f: Spectrum
    iterations: int
    residual: float
    support_defect: float


def outputs_from_w(w, f, line: FrequencyLine, grid: Grid1D):
    x, zeta = grid.points, line.zeta
    ww = _weights(grid)[:, None] * w
    pre = 0.5j / zeta
    Tf = f + pre * np.sum(np.exp(-1j * np.outer(x, zeta)) * ww, axis=0)
    Rf = pre * np.sum(np.exp(1j * np.outer(x, zeta)) * ww, axis=0)
    return Tf, Rf


def compute_T_Rplus(f, model: PermittivityModel, cut: CutoffPair, line: FrequencyLine,
                    dx=0.005, tol=1e-8, restart=50, max_iter=2000,
                    potential_sampling="pointwise") -> ScatteringOutput:
    if cut.R < model.R * (1 - 1e-12):
        raise ConfigError("cutoff R must cover the perturbation support")
    f = np.asarray(f.values if isinstance(f, Spectrum) else f, dtype=complex)
    grid = lattice(cut, dx)
    F = commutator_source(f, cut, grid, line)
    sol = solve_fredholm(F, model, cut, line, grid, tol, restart, max_iter, potential_sampling)
    Tf, Rf = outputs_from_w(sol.w, f, line, grid)
    om, s = line.omega, line.sigma
    return ScatteringOutput(Spectrum(om, s, Tf), Spectrum(om, s, Rf), Spectrum(om, s, f),
                            sol.iterations, sol.residual, sol.support_defect)


def _branch(lam, V):
    if lam * lam == V:
        raise ConfigError("lambda^2 coincides with a cell value; the plane-wave basis degenerates")
    k = np.sqrt(complex(lam * lam - V))
    if abs(k.imag) <= 1e-14 * max(1.0, abs(k)):
        k = complex(k.real, 0.0)
        return -k if lam < 0 else k
    return k if k.imag > 0 else -k


def _plane_basis(k, x):
    e, ei = np.exp(1j * k * x), np.exp(-1j * k * x)
    return np.array([[e, ei], [1j * k * e, -1j * k * ei]])


def transfer_matrix_smatrix(v: StepPotential, lam):
    """(T, R+, R-) of the time-independent wave equation u_tt = u_xx - V u at frequency lam."""
    if lam == 0:
        raise ConfigError("lambda = 0 is excluded")
    if not v.is_real:
        raise ConfigError("transfer-matrix oracle needs a real potential")
    ks = [complex(lam)] + [_branch(lam, val.real) for val in v.values] + [complex(lam)]
    P = np.eye(2, dtype=complex)
    for i, xb in enumerate(v.breakpoints):
        P = np.linalg.solve(_plane_basis(ks[i + 1], xb), _plane_basis(ks[i], xb)) @ P
    return 1.0 / P[1, 1], -P[1, 0] / P[1, 1], P[0, 1] / P[1, 1]


def hardy_norm_estimate(sampler, alpha_H, sigmas, omega):
    """max over sigma of exp(-2 sigma alpha_H) int |f(l + i sigma)|^2 dl (trapezoid)."""
    omega = np.asarray(omega, dtype=float)
    best = 0.0
    for s in sigmas:
        vals = np.asarray(sampler(omega + 1j * s))
        best = max(best, math.exp(-2 * s * alpha_H) * float(np.trapezoid(np.abs(vals) ** 2, omega)))
    return best


def schur_bound(model: PermittivityModel, line: FrequencyLine):
    """(1 + 1/gamma) * max|V| * (1/2pi) ||p^||_L1, an operator-norm bound for A."""
    al = model.alpha_p
    l1 = 2 * math.pi if al == 0 else math.sqrt(math.pi / al) * 2 * math.sqrt(math.pi * al)
    gam = model.gamma
    factor = 1.0 + (1.0 / gam if gam > 0 else math.inf)
    return factor * model.potential.vmax * l1 / (2 * math.pi)
