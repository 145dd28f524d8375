"""Command-line front end: configuration parsing, dispatch and file output.

    memwave {simulate|extract|smatrix|validate|convergence|frames}
            [--config PATH] [--out DIR] [--threads N] [--stride N] [--sigma-line S]

Outputs go to <out>/<name>/{frames,spectra,series,reports}/, where <out> is
--out, else $MEMWAVE_OUT, else ./runs.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import analysis, configs
from ._accel import backend, set_threads
from .core import ConfigError, Grid1D, PermittivityModel, StepPotential, TimeAxis, WavePacket
from .freqdomain import CutoffPair, FrequencyLine, SolverError, compute_T_Rplus
from .scattering import ExtractionError, empirical_coefficients, incident_spectrum, split_fields, support_check
from .timedomain import SimulationConfig, SimulationError, simulate

log = logging.getLogger("memwave")

# JSON section -> {json key: RunConfig field}
SCHEMA = {
    "grid": {"L": "L", "dx": "dx"},
    "time": {"T": "T", "dt": "dt"},
    "packet": {"x0": "x0", "sigma_g": "sigma_g", "lambda": "lam"},
    "model": {"breakpoints": "breakpoints", "values": "values", "alpha_p": "alpha_p",
              "t0": "t0", "gamma": "gamma", "R": "R"},
    "simulation": {"prehistory_horizon": "prehistory_horizon", "probe_left": "probe_left",
                   "probe_right": "probe_right", "startup": "startup",
                   "potential_sampling": "potential_sampling", "stride": "stride"},
    "line": {"sigma": "sigma", "omega_max": "omega_max", "n_omega": "n_omega",
             "epsilon": "epsilon", "regularize": "regularize"},
    "cutoff": {"R1": "R1", "lattice_dx": "lattice_dx"},
    "solver": {"tol": "tol", "restart": "restart", "max_iter": "max_iter"},
}
TOP_LEVEL = {"name", "seed", "output"}


@dataclass(frozen=True)
class RunConfig:
    name: str = "default"
    L: float = math.pi
    dx: float = 0.01
    T: float = 3.65
    dt: float = 0.005
    x0: float = -2.0
    sigma_g: float = 0.05
    lam: float = 10.0
    breakpoints: tuple = (-0.5, -0.25, 0.25, 0.5)
    values: tuple = (400.0, -50.0, 300.0)
    alpha_p: float = 2.0
    t0: float = 2.0
    gamma: float = 3.0
    R: float | None = None
    prehistory_horizon: float = 10.0
    probe_left: float = -0.75
    probe_right: float = 0.75
    startup: str = "taylor2"
    potential_sampling: str = "pointwise"
    stride: int = 4
    sigma: float = 0.5
    omega_max: float = 80.0
    n_omega: int = 256
    epsilon: float = 1e-3
    regularize: bool = False
    R1: float | None = None
    lattice_dx: float = 0.005
    tol: float = 1e-8
    restart: int = 50
    max_iter: int = 2000
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "values", tuple(_to_complex(v) for v in self.values))
        # re-check every physical invariant by building the wrapped objects
        self.simulation()
        self.line()
        self.cutoff()
        if self.stride < 1:
            raise ConfigError("simulation.stride must be >= 1")
        if not (self.tol > 0 and self.restart >= 1 and self.max_iter >= 1):
            raise ConfigError("solver: tol must be positive, restart and max_iter at least 1")
        if not self.lattice_dx > 0:
            raise ConfigError("cutoff.lattice_dx must be positive")

    def model(self):
        return PermittivityModel(StepPotential(self.breakpoints, self.values),
                                 alpha_p=self.alpha_p, t0=self.t0, gamma=self.gamma, R=self.R)

    def simulation(self):
        return SimulationConfig(
            grid=Grid1D.symmetric(self.L, self.dx),
            time=TimeAxis.from_duration(self.T, self.dt),
            packet=WavePacket(self.x0, self.sigma_g, self.lam),
            model=self.model(),
            prehistory_horizon=self.prehistory_horizon,
            probe_left=self.probe_left, probe_right=self.probe_right,
            startup=self.startup, potential_sampling=self.potential_sampling,
        )

    def line(self, sigma=None):
        return FrequencyLine(self.sigma if sigma is None else sigma, self.omega_max, self.n_omega,
                             self.epsilon, self.regularize)

    def cutoff(self):
        R = self.model().R
        return CutoffPair(R, self.R1 if self.R1 is not None else 2.0 * R)

    def to_dict(self):
        out = {"name": self.name}
        for section, keys in SCHEMA.items():
            out[section] = {k: _jsonable(getattr(self, f)) for k, f in keys.items()}
        out["seed"] = self.seed
        out["output"] = self.output
        return out


def _to_complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError("complex values are written as [re, im]")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, complex):
        return v.real if v.imag == 0 else [v.real, v.imag]
    return v


def config_from_dict(d: dict) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("config root must be a JSON object")
    kw = {}
    for key, val in d.items():
        if key in TOP_LEVEL:
            kw[key] = val
        elif key in SCHEMA:
            if not isinstance(val, dict):
                raise ConfigError(f"{key}: expected an object")
            for sub, sval in val.items():
                if sub not in SCHEMA[key]:
                    raise ConfigError(f"{key}.{sub}: unknown key")
                kw[SCHEMA[key][sub]] = sval
        else:
            raise ConfigError(f"{key}: unknown key")
    types = {f.name: f.type for f in fields(RunConfig)}
    for name, val in kw.items():
        t = types[name]
        if val is None:
            if "None" not in str(t):
                raise ConfigError(f"{name}: may not be null")
            continue
        if t == "bool":
            if not isinstance(val, bool):
                raise ConfigError(f"{name}: expected true or false, got {val!r}")
            continue
        if isinstance(val, bool):
            raise ConfigError(f"{name}: unexpected boolean")
        if t in ("float", "float | None") and not isinstance(val, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {val!r}")
        if t == "int" and not (isinstance(val, int) and not isinstance(val, bool)):
            raise ConfigError(f"{name}: expected an integer, got {val!r}")
        if t == "str" or t == "str | None":
            if not isinstance(val, str):
                raise ConfigError(f"{name}: expected a string, got {val!r}")
    try:
        return RunConfig(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value: {exc}") from exc


def parse_config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return config_from_dict(data)


def dump_config(cfg: RunConfig, path):
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


# ----------------------------------------------------------------------------
# output helpers
# ----------------------------------------------------------------------------

def run_dir(cfg: RunConfig, out=None, name=None):
    root = out or cfg.output or os.environ.get("MEMWAVE_OUT") or "runs"
    return Path(root) / (name or cfg.name)


def write_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o)}")


def write_frames(traj, directory: Path):
    directory.mkdir(parents=True, exist_ok=True)
    V = traj.V
    vmax = np.abs(V).max()
    W = (V / vmax).real if vmax > 0 else V.real
    for k in range(traj.u.shape[0]):
        u = traj.u[k]
        with open(directory / f"frame_{k:06d}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "re_u", "im_u", "abs_u", "V_norm"])
            for row in zip(traj.x, u.real, u.imag, np.abs(u), W):
                w.writerow([f"{val:.10g}" for val in row])
    return traj.u.shape[0]


def write_series(directory: Path, name, s, h):
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / f"{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "re", "im"])
        for a, z in zip(s, h):
            w.writerow([f"{a:.10g}", f"{z.real:.10g}", f"{z.imag:.10g}"])


# ----------------------------------------------------------------------------
# commands; each returns an exit status
# ----------------------------------------------------------------------------

def cmd_simulate(cfg: RunConfig, args):
    d = run_dir(cfg, args.out)
    sim = cfg.simulation()
    traj = simulate(sim, stride=cfg.stride)
    d.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(d / "trajectory.npz", x=traj.x, times=traj.times, u=traj.u, v=traj.v,
                        probe_times=traj.probe_times, probe_u=traj.probe_u)
    write_json(d / "reports" / "simulate.json", {
        "status": "ok", "snapshots": int(traj.u.shape[0]), "peak": traj.peak,
        "boundary_contact": traj.boundary_contact, "backend": backend(),
    })
    return 0


def cmd_extract(cfg: RunConfig, args):
    d = run_dir(cfg, args.out)
    traj = simulate(cfg.simulation(), stride=cfg.stride, store=True)
    rec = split_fields(traj, incident="reference", check_window=not args.no_window_check)
    write_series(d / "series", "incident", rec.s_incident, rec.incident)
    write_series(d / "series", "reflected_G", rec.s_G, rec.reflected_G)
    write_series(d / "series", "transmitted_F", rec.s_F, rec.transmitted_F)
    line = cfg.line(args.sigma_line)
    G, F = empirical_coefficients(rec, line.sigma, line.omega, tail="constant")
    write_json(d / "spectra" / "G_hat.json", G.to_json())
    write_json(d / "spectra" / "F_hat.json", F.to_json())
    sup = support_check(rec)
    write_json(d / "reports" / "extract.json", {"support": sup,
                                                 "residual_energy_fraction": rec.residual_energy_fraction})
    return 0 if sup["pass"] else 1


def cmd_smatrix(cfg: RunConfig, args):
    d = run_dir(cfg, args.out)
    line = cfg.line(args.sigma_line)
    f = incident_spectrum(WavePacket(cfg.x0, cfg.sigma_g, cfg.lam), line.zeta)
    out = compute_T_Rplus(f, cfg.model(), cfg.cutoff(), line, dx=cfg.lattice_dx, tol=cfg.tol,
                          restart=cfg.restart, max_iter=cfg.max_iter,
                          potential_sampling=cfg.potential_sampling)
    write_json(d / "spectra" / "f.json", out.f.to_json())
    write_json(d / "spectra" / "T_of_f.json", out.T_of_f.to_json())
    write_json(d / "spectra" / "Rplus_of_f.json", out.Rplus_of_f.to_json())
    write_json(d / "reports" / "smatrix.json", {
        "iterations": out.iterations, "residual": out.residual,
        "support_defect": out.support_defect, "sigma": line.sigma,
    })
    return 0


CAMPAIGNS = ("config_run", "free_transport", "memoryless_reduction", "classical_oracle",
             "support", "frequency_identities", "cross_pipeline", "memory_fixed_point", "fig1")


def run_campaign(name, cfg: RunConfig):
    if name == "config_run":
        traj = simulate(cfg.simulation(), stride=cfg.stride)
        et = analysis.energy_trace(traj)
        ok = bool(np.isfinite(traj.peak) and et.envelope_residual < 0.5)
        return {"peak": traj.peak, "lambda_fit": et.lambda_fit,
                "envelope_residual": et.envelope_residual, "pass": ok}
    if name == "free_transport":
        c = configs.free_transport()
        err = analysis.free_transport_error(c)
        conv = analysis.convergence_study(c)
        order = conv.orders[-1]
        return {"final_error": err, "convergence": conv.to_json(),
                "pass": bool(err < 1e-3 and abs(order - 2.0) <= 0.2)}
    if name == "memoryless_reduction":
        return analysis.memoryless_reduction_check(configs.memoryless_barrier())
    if name == "classical_oracle":
        return analysis.classical_oracle_check(configs.classical_oracle())
    if name == "support":
        return analysis.support_campaign(configs.shipped())
    if name == "frequency_identities":
        c = configs.cross_validation()
        reps = [analysis.frequency_identities(c.model, FrequencyLine(s), c.packet) for s in (0.5, 1.0)]
        return {"lines": reps, "pass": all(r["pass"] for r in reps)}
    if name == "cross_pipeline":
        return analysis.cross_pipeline_consistency(configs.cross_validation(dx=0.01))
    if name == "memory_fixed_point":
        rows = [analysis.memory_fixed_point(1.0, dt) for dt in (0.02, 0.01, 0.005)]
        ratios = [rows[k]["error"] / rows[k + 1]["error"] for k in range(2)]
        return {"rows": rows, "error_ratios": ratios,
                "pass": bool(all(abs(r - 2.0) < 0.05 for r in ratios))}
    if name == "fig1":
        return analysis.fig1_campaign(cfg.stride)
    raise ConfigError(f"unknown campaign {name!r}")


def cmd_validate(cfg: RunConfig, args):
    d = run_dir(cfg, args.out)
    names = args.campaigns.split(",") if args.campaigns else list(CAMPAIGNS)
    status = 0
    summary = {}
    for name in names:
        try:
            rep = run_campaign(name, cfg)
        except (ConfigError, SimulationError, SolverError, ExtractionError) as exc:
            rep = {"pass": False, "error": str(exc)}
        summary[name] = bool(rep["pass"])
        write_json(d / "reports" / f"{name}.json", rep)
        log.info("%-22s %s", name, "PASS" if rep["pass"] else "FAIL")
        if not rep["pass"]:
            status = 1
    write_json(d / "reports" / "summary.json", {"campaigns": summary, "pass": status == 0})
    return status


def cmd_convergence(cfg: RunConfig, args):
    d = run_dir(cfg, args.out)
    rep = analysis.convergence_study(cfg.simulation(), levels=args.levels)
    write_json(d / "reports" / "convergence.json", rep.to_json())
    return 0


def _parse_pairs(text):
    pairs = []
    for chunk in text.split(";"):
        g, a = chunk.split(",")
        pairs.append((float(g), float(a)))
    return pairs


def cmd_frames(cfg: RunConfig, args):
    pairs = _parse_pairs(args.pairs) if args.pairs else [(cfg.gamma, cfg.alpha_p)]
    status = 0
    for g, a in pairs:
        c = replace(cfg, gamma=g, alpha_p=a)
        name = cfg.name if not args.pairs else f"{cfg.name}_g{g:g}_a{a:g}"
        d = run_dir(cfg, args.out, name)
        traj = simulate(c.simulation(), stride=cfg.stride)
        et = analysis.energy_trace(traj)
        n = write_frames(traj, d / "frames")
        ok = bool(np.isfinite(traj.peak) and et.envelope_residual < 0.5)
        write_json(d / "reports" / "frames.json", {
            "gamma": g, "alpha_p": a, "frames": n, "peak": traj.peak,
            "lambda_fit": et.lambda_fit, "envelope_residual": et.envelope_residual,
            "boundary_contact": traj.boundary_contact, "pass": ok,
        })
        status |= 0 if ok else 1
    return status


COMMANDS = {
    "simulate": cmd_simulate,
    "extract": cmd_extract,
    "smatrix": cmd_smatrix,
    "validate": cmd_validate,
    "convergence": cmd_convergence,
    "frames": cmd_frames,
}


def build_parser():
    p = argparse.ArgumentParser(prog="memwave", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON run configuration (default: built-in defaults)")
    p.add_argument("--out", help="output root (overrides $MEMWAVE_OUT)")
    p.add_argument("--threads", type=int, help="numba worker threads")
    p.add_argument("--stride", type=int, help="snapshot stride in time steps")
    p.add_argument("--sigma-line", type=float, help="height of the frequency line")
    p.add_argument("--name", help="run name (overrides the config)")
    p.add_argument("--pairs", help='frames: list of "gamma,alpha" pairs separated by ";"')
    p.add_argument("--campaigns", help="validate: comma-separated subset of " + ",".join(CAMPAIGNS))
    p.add_argument("--levels", type=int, default=3, help="convergence: refinement levels")
    p.add_argument("--no-window-check", action="store_true", help="extract: skip the window test")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    set_threads(args.threads)
    try:
        cfg = parse_config(args.config)
        over = {}
        if args.stride is not None:
            over["stride"] = args.stride
        if args.name:
            over["name"] = args.name
        if over:
            cfg = replace(cfg, **over)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, SimulationError, SolverError, ExtractionError) as exc:
        print(f"memwave {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
