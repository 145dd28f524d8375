"""Monitors, convergence studies and the validation campaigns."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import configs
from .core import ConfigError, TimeAxis, eval_packet, sample_potential
from .freqdomain import (
    CutoffPair,
    FrequencyLine,
    compute_T_Rplus,
    transfer_matrix_smatrix,
)
from .scattering import (
    coefficient_ratios,
    empirical_coefficients,
    incident_spectrum,
    split_fields,
    support_check,
)
from .timedomain import SimulationConfig, Trajectory, build_laplacian_apply, check_cone, simulate


@dataclass
class EnergyTrace:
    times: np.ndarray
    e_h1: np.ndarray
    e_l2t: np.ndarray
    lambda_fit: float
    envelope_residual: float

    @property
    def total(self):
        return self.e_h1 + self.e_l2t


@dataclass
class ConvergenceReport:
    dx: list
    dt: list
    errors_vs_finest: list
    successive: list
    orders: list
    fitted_order: float
    exact_errors: list = field(default_factory=list)

    def to_json(self):
        return {k: getattr(self, k) for k in
                ("dx", "dt", "errors_vs_finest", "successive", "orders", "fitted_order", "exact_errors")}


def _rel(a, b):
    nb = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / nb) if nb > 0 else float(np.linalg.norm(a))


def energy_trace(traj: Trajectory, departure=0.01) -> EnergyTrace:
    """Discrete H1 norm of u and L2 norm of v per snapshot, plus an exponential envelope.

    The rate is a least-squares fit of log E over the active window, which starts
    at the first snapshot where E differs from E(0) by more than ``departure``
    (relative).  ``envelope_residual`` is the smallest c >= 0 with
    log E(t) <= log E(0) + lambda_fit * t + c on the whole trace.
    """
    dx = traj.config.grid.dx
    u, v = traj.u, traj.v
    ux = np.gradient(u, dx, axis=1)
    e_h1 = np.sqrt(np.sum(np.abs(u) ** 2 + np.abs(ux) ** 2, axis=1) * dx)
    e_l2t = np.sqrt(np.sum(np.abs(v) ** 2, axis=1) * dx)
    E = e_h1 + e_l2t
    t = np.asarray(traj.times, dtype=float)
    if E[0] <= 0 or len(E) < 2:
        return EnergyTrace(t, e_h1, e_l2t, 0.0, 0.0)
    logE = np.log(np.maximum(E, 1e-300))
    moved = np.abs(E / E[0] - 1.0) > departure
    k = int(np.argmax(moved)) if moved.any() else 0
    if len(t) - k < 2:
        k = 0
    lam = float(np.polyfit(t[k:], logE[k:], 1)[0])
    c = float(max(0.0, (logE - logE[0] - lam * t).max()))
    return EnergyTrace(t, e_h1, e_l2t, lam, c)


def _final_u(cfg):
    return simulate(cfg, store=False).final.u


def convergence_study(cfg: SimulationConfig, levels=3, exact=None) -> ConvergenceReport:
    """Refine dx and dt together by halving; compare final fields on the coarsest nodes.

    Orders come from successive differences, p = log2(|u_k - u_{k+1}| / |u_{k+1} - u_{k+2}|),
    which is independent of the (unknown) error constant.  Errors against the finest
    level are reported too.  ``exact`` optionally maps x -> exact final field.
    """
    if levels < 3:
        raise ConfigError("need at least 3 refinement levels")
    cfgs = [cfg.refined(2 ** k) if k else cfg for k in range(levels)]
    for k, c in enumerate(cfgs):
        try:
            check_cone(c)
        except ConfigError as exc:
            raise ConfigError(f"cone violation at level {k}") from exc
    finals = []
    for k, c in enumerate(cfgs):
        finals.append(_final_u(c)[:: 2 ** k])
    fine = finals[-1]
    vs_finest = [_rel(u, fine) for u in finals[:-1]]
    succ = [_rel(finals[k], finals[k + 1]) for k in range(levels - 1)]
    orders = [math.log2(succ[k] / succ[k + 1]) if succ[k + 1] > 0 else math.inf
              for k in range(levels - 2)]
    h = np.array([c.grid.dx for c in cfgs[:-1]])
    fitted = float(np.polyfit(np.log(h), np.log(np.maximum(succ, 1e-300)), 1)[0])
    exact_err = []
    if exact is not None:
        x0 = cfg.grid.points
        ref = exact(x0)
        exact_err = [_rel(u, ref) for u in finals]
    return ConvergenceReport([c.grid.dx for c in cfgs], [c.dt for c in cfgs],
                             vs_finest, succ, orders, fitted, exact_err)


def free_transport_error(cfg: SimulationConfig):
    """Relative L2 error of the final field against g(x - T) (coefficient must vanish)."""
    if np.any(sample_potential(cfg.model.potential, cfg.grid) != 0):
        raise ConfigError("free transport check needs a = 0")
    u = _final_u(cfg)
    exact = eval_packet(cfg.packet, cfg.grid.points - cfg.time.T)
    return _rel(u, exact)


def potential_leapfrog(cfg: SimulationConfig):
    """Direct scheme for D_t^2 u - (D_x^2 + V) u = 0 written for (u, v = D_t u):

        u_{n+1} = u_{n-1} + 2i dt v_n,   v_{n+1} = v_{n-1} + 2i dt (Dxx + V) u_n,

    started with a second-order Taylor step.  Serves as the oracle for the
    memory scheme with gamma = alpha_p = 0.
    """
    check_cone(cfg)
    lap = build_laplacian_apply(cfg.grid)
    V = sample_potential(cfg.model.potential, cfg.grid, cfg.potential_sampling)
    dt, n_t = cfg.dt, cfg.time.n_t
    x = cfg.grid.points
    u0 = eval_packet(cfg.packet, x)
    v0 = 1j * (-2 * (x - cfg.packet.x0) / cfg.packet.sigma_g + 1j * cfg.packet.lam) * u0

    def H(w):
        return lap(w) + V * w

    u1 = u0 + 1j * dt * v0 - 0.5 * dt * dt * H(u0)
    v1 = v0 + 1j * dt * H(u0) - 0.5 * dt * dt * H(v0)
    um, vm, u, v = u0, v0, u1, v1
    for _ in range(1, n_t - 1):
        um, vm, u, v = u, v, um + 2j * dt * v, vm + 2j * dt * H(u)
    return u


def memoryless_reduction_check(cfg: SimulationConfig, halvings=3, min_slope=0.8):
    """Distance between the memory scheme and the direct-potential scheme as dt halves."""
    m = cfg.model
    if m.gamma != 0 or m.alpha_p != 0:
        raise ConfigError("memoryless reduction needs gamma = alpha_p = 0")
    dists, dts = [], []
    for k in range(halvings + 1):
        c = replace(cfg, time=TimeAxis(cfg.dt / 2 ** k, (cfg.time.n_t - 1) * 2 ** k + 1))
        dists.append(_rel(_final_u(c), potential_leapfrog(c)))
        dts.append(c.dt)
    identical = max(dists) < 1e-12
    slopes = [] if identical else [math.log2(dists[k] / dists[k + 1]) for k in range(halvings)]
    return {
        "dt": dts,
        "distance": dists,
        "slopes": slopes,
        "min_slope": min_slope,
        "identical": identical,
        "pass": bool(identical or all(s >= min_slope for s in slopes)),
    }


def classical_oracle_check(cfg: SimulationConfig, band=(5.0, 15.0), n=41, tol=0.02,
                           unitarity_tol=0.01, decay_tol=1e-2):
    """Empirical T, R+ of a memoryless run against the transfer matrix on ``band``.

    Accuracy is the relative L2 error over the band (R+ has zeros, so pointwise
    relative error is not meaningful for it).
    """
    pot = cfg.model.potential
    traj = simulate(cfg, store=False)
    ref = simulate(cfg.free(), store=False)
    rec = split_fields(traj, incident="reference", reference=ref)
    om = np.linspace(band[0], band[1], n)
    Rp, T = coefficient_ratios(rec, om, decay_tol=decay_tol)
    ok = ~np.isnan(Rp)
    exact = np.array([transfer_matrix_smatrix(pot, lam) for lam in om])
    Tx, Rx = exact[:, 0], exact[:, 1]
    errT = _rel(T[ok], Tx[ok])
    errR = _rel(Rp[ok], Rx[ok])
    unit_emp = float(np.abs(np.abs(T[ok]) ** 2 + np.abs(Rp[ok]) ** 2 - 1).max())
    unit_oracle = float(np.abs(np.abs(Tx) ** 2 + np.abs(Rx) ** 2 - 1).max())
    return {
        "band": list(band),
        "samples_used": int(ok.sum()),
        "T_rel_L2": errT,
        "T_max_pointwise": float(np.abs((T[ok] - Tx[ok]) / Tx[ok]).max()),
        "Rplus_rel_L2": errR,
        "unitarity_empirical": unit_emp,
        "unitarity_oracle": unit_oracle,
        "support": support_check(rec),
        "tol": tol,
        "pass": bool(errT < tol and errR < tol and unit_oracle < 1e-12 and unit_emp < unitarity_tol),
    }


def memory_fixed_point(gamma=1.0, dt=0.01):
    """Constant input v = 1: the recurrence settles at dt / (1 - e^{-gamma dt}) vs 1/gamma."""
    fixed = dt / (1.0 - math.exp(-gamma * dt))
    return {"gamma": gamma, "dt": dt, "fixed_point": fixed, "exact": 1.0 / gamma,
            "error": fixed - 1.0 / gamma}


def frequency_identities(model, line: FrequencyLine, packet, R1_pair=(1.5, 2.0), lattice_dx=0.005,
                         tol=1e-8, free_tol=1e-8, support_tol=1e-10, indep_tol=1e-6):
    """Free-case identity, solver residual, support reproduction, cutoff independence."""
    f = incident_spectrum(packet, line.zeta)
    R = model.R
    fnorm = np.abs(f).max()
    zero = replace(model, potential=replace(model.potential, values=(0.0,) * len(model.potential.values)))
    free = compute_T_Rplus(f, zero, CutoffPair(R, R1_pair[1] * R), line, dx=lattice_dx, tol=tol)
    free_T = float(np.abs(free.T_of_f.values - f).max() / fnorm)
    free_R = float(np.abs(free.Rplus_of_f.values).max() / fnorm)
    outs = [compute_T_Rplus(f, model, CutoffPair(R, k * R), line, dx=lattice_dx, tol=tol)
            for k in R1_pair]
    a, b = outs
    indep = max(_rel(a.T_of_f.values, b.T_of_f.values), _rel(a.Rplus_of_f.values, b.Rplus_of_f.values))
    residual = max(o.residual for o in outs)
    support = max(o.support_defect for o in outs)
    return {
        "sigma": line.sigma,
        "free_T_minus_f": free_T,
        "free_Rplus": free_R,
        "residual": residual,
        "iterations": [o.iterations for o in outs],
        "support_defect": support,
        "cutoff_independence": indep,
        "pass": bool(free_T < free_tol and free_R < free_tol and residual < tol
                     and support < support_tol and indep < indep_tol),
    }


def cross_pipeline_consistency(cfg: SimulationConfig, sigmas=(0.5, 1.0), line_kw=None,
                               R1=None, lattice_dx=0.005, refine_levels=2, tol=0.05):
    """Compare time-extracted spectra G^, F^ with the frequency-domain R+ g^, T g^.

    The time-domain side is run at ``refine_levels`` successive halvings of
    (dx, dt); the frequency-domain side is solved once per line.
    """
    line_kw = dict(line_kw or {})
    model, packet = cfg.model, cfg.packet
    cut = CutoffPair(model.R, R1 if R1 is not None else 2.0 * model.R)
    fd = {}
    for s in sigmas:
        line = FrequencyLine(sigma=s, **line_kw)
        f = incident_spectrum(packet, line.zeta)
        fd[s] = (line, compute_T_Rplus(f, model, cut, line, dx=lattice_dx,
                                       potential_sampling=cfg.potential_sampling))
    levels = []
    for k in range(refine_levels):
        c = cfg.refined(2 ** k) if k else cfg
        traj = simulate(c, store=False)
        rec = split_fields(traj, incident="reference", check_window=False)
        row = {"dx": c.grid.dx, "dt": c.dt}
        for s, (line, out) in fd.items():
            G, F = empirical_coefficients(rec, s, line.omega, tail="constant")
            tail = max(abs(rec.reflected_G[-1]), abs(rec.transmitted_F[-1])) * math.exp(-s * rec.s_F[-1])
            row[f"sigma={s:g}"] = {
                "Rplus_distance": _rel(G.values, out.Rplus_of_f.values),
                "T_distance": _rel(F.values, out.T_of_f.values),
                "window_tail": float(tail),
                "solver_iterations": out.iterations,
                "solver_residual": out.residual,
            }
        levels.append(row)
    keys = [f"sigma={s:g}" for s in sigmas]
    finest = levels[-1]
    ok = all(finest[k]["Rplus_distance"] < tol and finest[k]["T_distance"] < tol for k in keys)
    decreasing = True
    if len(levels) > 1:
        for k in keys:
            for name in ("Rplus_distance", "T_distance"):
                if levels[-1][k][name] > 1.05 * levels[-2][k][name]:
                    decreasing = False
    return {"levels": levels, "tol": tol, "decreasing": decreasing, "pass": bool(ok and decreasing)}


def support_campaign(cfgs: dict, tol=1e-3):
    """Support property of G and F for every named configuration."""
    out = {}
    for name, c in cfgs.items():
        traj = simulate(c, store=False)
        rec = split_fields(traj, incident="reference", check_window=False)
        out[name] = support_check(rec, tol)
    return {"configs": out, "pass": bool(all(r["pass"] for r in out.values()))}


def fig1_campaign(stride=4):
    """Bounded fields and a log-linear energy envelope for the three-cell panels."""
    out = {}
    for g, a in configs.FIG1_PAIRS:
        traj = simulate(configs.fig1(g, a), stride=stride)
        et = energy_trace(traj)
        out[f"gamma={g:g},alpha={a:g}"] = {
            "peak": traj.peak,
            "lambda_fit": et.lambda_fit,
            "envelope_residual": et.envelope_residual,
            "boundary_contact": traj.boundary_contact,
            "pass": bool(np.isfinite(traj.peak) and np.isfinite(et.lambda_fit) and et.envelope_residual < 0.5),
        }
    return {"runs": out, "pass": bool(all(r["pass"] for r in out.values()))}
