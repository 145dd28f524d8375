"""Splitting simulated fields into incident, reflected and transmitted parts,
and transforming the resulting time series to a horizontal frequency line.

Orientation: the incoming wave is u = g(x - t), i.e. a right-moving profile
g~(s) = g(-s) of the characteristic variable s = t - x.  Outside [-R, R]

    u(t, x) = g~(t - x) + G(t + x)    at the left probe,
    u(t, x) = F(t - x)                at the right probe.

Fourier convention: h^(zeta) = int h(s) exp(i zeta s) ds with zeta = omega + i sigma.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import eval_packet
from .timedomain import Trajectory, simulate


class ExtractionError(RuntimeError):
    pass


@dataclass
class ScatteringRecord:
    ds: float
    R: float
    probe_left: float
    probe_right: float
    s_incident: np.ndarray
    incident: np.ndarray
    s_G: np.ndarray
    reflected_G: np.ndarray
    s_F: np.ndarray
    transmitted_F: np.ndarray
    transmitted_reference: np.ndarray | None = None
    incident_mode: str = "exact"
    residual_energy_fraction: float = 0.0

    def shifted(self, shift):
        """Copy with G and F moved to the left by ``shift`` in s (for negative tests)."""
        return replace(self, s_G=self.s_G - shift, s_F=self.s_F - shift)


@dataclass
class Spectrum:
    omega: np.ndarray
    sigma: float
    values: np.ndarray

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        self.omega = np.asarray(self.omega, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)

    @property
    def zeta(self):
        return self.omega + 1j * self.sigma

    def to_json(self):
        return {
            "sigma": float(self.sigma),
            "omega": self.omega.tolist(),
            "values": [[float(z.real), float(z.imag)] for z in self.values],
        }

    @classmethod
    def from_json(cls, d):
        vals = np.array([complex(re, im) for re, im in d["values"]])
        return cls(np.asarray(d["omega"], dtype=float), float(d["sigma"]), vals)


def _energy_between(traj: Trajectory, lo, hi):
    x, dx = traj.x, traj.config.grid.dx
    u, v = traj.final.u, traj.final.v
    ux = np.gradient(u, dx)
    inside = (x > lo) & (x < hi)
    return float(np.sum(np.abs(ux[inside]) ** 2 + np.abs(v[inside]) ** 2) * dx)


def split_fields(traj: Trajectory, incident="exact", reference: Trajectory | None = None,
                 check_window=True, window_tol=0.01) -> ScatteringRecord:
    """Read G and F off the probe columns.

    ``incident="exact"`` subtracts the analytic g(x_L - t).  ``"reference"``
    subtracts the same probe column from a run with the perturbation switched
    off on the identical grid, which cancels the scheme's own dispersion and
    startup error.
    """
    cfg = traj.config
    R = cfg.model.R
    xL, xR = traj.probe_positions
    if not (xL < -R and xR > R):
        raise ExtractionError("probe inside support")
    t = traj.probe_times
    uL, uR = traj.probe_u[:, 0], traj.probe_u[:, 1]
    ref_F = None
    if incident == "exact":
        inc = eval_packet(cfg.packet, xL - t)
    elif incident == "reference":
        if reference is None:
            reference = simulate(cfg.free(), store=False)
        if reference.probe_u.shape != traj.probe_u.shape or reference.probe_positions != traj.probe_positions:
            raise ExtractionError("reference run is on a different grid")
        inc = reference.probe_u[:, 0]
        ref_F = reference.probe_u[:, 1].copy()
    else:
        raise ValueError(f"unknown incident mode {incident!r}")

    F = uR.copy()
    frac = 0.0
    if check_window:
        ds = t[1] - t[0]
        Fp = np.gradient(F, ds)
        transmitted = 2.0 * float(np.sum(np.abs(Fp) ** 2) * ds)
        left_over = _energy_between(traj, xL, xR)
        frac = left_over / max(left_over + transmitted, 1e-300)
        if frac > window_tol:
            raise ExtractionError(
                f"window too short: {100 * frac:.2g}% of the energy has not left [x_L, x_R]"
            )
    return ScatteringRecord(
        ds=float(t[1] - t[0]), R=R, probe_left=xL, probe_right=xR,
        s_incident=t - xL, incident=np.asarray(inc),
        s_G=t + xL, reflected_G=uL - inc,
        s_F=t - xR, transmitted_F=F,
        transmitted_reference=ref_F, incident_mode=incident,
        residual_energy_fraction=frac,
    )


def support_check(rec: ScatteringRecord, tol=1e-3):
    """Largest |G|, |F| at s < -R relative to the record's largest amplitude."""
    scale = max(np.abs(rec.reflected_G).max(), np.abs(rec.transmitted_F).max(),
                np.abs(rec.incident).max(), 1e-300)

    def early(s, h):
        sel = s < -rec.R
        return float(np.abs(h[sel]).max() / scale) if sel.any() else 0.0

    g_early = early(rec.s_G, rec.reflected_G)
    f_early = early(rec.s_F, rec.transmitted_F)
    return {
        "G_before_support": g_early,
        "F_before_support": f_early,
        "tol": tol,
        "pass": bool(g_early < tol and f_early < tol),
    }


def _trapezoid_weights(n, ds):
    w = np.full(n, ds)
    w[0] = w[-1] = 0.5 * ds
    return w


def time_to_frequency(s, h, sigma, omega, tail="none", decay_tol=1e-6, check=True,
                      chunk=4096) -> Spectrum:
    """Trapezoidal transform of samples h(s) on the line omega + i*sigma.

    ``tail="constant"`` continues h by its last value beyond the window and
    adds that piece in closed form, h_end * i exp(i zeta s_end) / zeta; this
    handles the constant offset left behind by a time-dependent coefficient.
    """
    s = np.asarray(s, dtype=float)
    h = np.asarray(h, dtype=complex)
    omega = np.asarray(omega, dtype=float)
    zeta = omega + 1j * sigma
    weighted = np.abs(h) * np.exp(-sigma * (s - s[0]))
    peak = weighted.max()
    if check and peak > 0:
        if tail == "none":
            ends = [weighted[-1]] if sigma > 0 else [weighted[0], weighted[-1]]
            if max(ends) > decay_tol * peak:
                raise ExtractionError("window not decayed")
        elif tail == "constant":
            k = max(2, len(h) // 20)
            if np.abs(h[-k:] - h[-1]).max() > 1e-3 * np.abs(h).max():
                raise ExtractionError("window not decayed: series is not flat at the end")
    if tail not in ("none", "constant"):
        raise ValueError(f"unknown tail mode {tail!r}")
    hw = h * _trapezoid_weights(len(s), s[1] - s[0])
    out = np.zeros(len(zeta), dtype=complex)
    for a in range(0, len(s), chunk):
        out += hw[a:a + chunk] @ np.exp(1j * np.outer(s[a:a + chunk], zeta))
    if tail == "constant":
        out += h[-1] * 1j * np.exp(1j * zeta * s[-1]) / zeta
    return Spectrum(omega, sigma, out)


def incident_spectrum(packet, zeta):
    """Closed-form transform of g~(s) = g(-s)."""
    zeta = np.asarray(zeta, dtype=complex)
    return (np.exp(-1j * zeta * packet.x0) * np.sqrt(np.pi * packet.sigma_g)
            * np.exp(-packet.sigma_g * (packet.lam - zeta) ** 2 / 4.0))


def empirical_coefficients(rec: ScatteringRecord, sigma, omega, tail="none", decay_tol=1e-6):
    """(G^, F^) on the line omega + i*sigma."""
    G = time_to_frequency(rec.s_G, rec.reflected_G, sigma, omega, tail=tail, decay_tol=decay_tol)
    F = time_to_frequency(rec.s_F, rec.transmitted_F, sigma, omega, tail=tail, decay_tol=decay_tol)
    return G, F


def coefficient_ratios(rec: ScatteringRecord, omega, sigma=0.0, mask=0.01, decay_tol=1e-6):
    """Pointwise R+ and T estimates for a time-independent perturbation.

    R+ = G^/g^ with g^ the incident spectrum at the left probe; T = F^/F^_ref
    when a reference transmitted series is available (cancelling the scheme's
    transport phase error), otherwise F^/g^.  Values where |g^| is below
    ``mask`` times its maximum are NaN.
    """
    G, F = empirical_coefficients(rec, sigma, omega, decay_tol=decay_tol)
    g = time_to_frequency(rec.s_incident, rec.incident, sigma, omega, decay_tol=decay_tol).values
    den_T = g
    if rec.transmitted_reference is not None:
        den_T = time_to_frequency(rec.s_F, rec.transmitted_reference, sigma, omega,
                                  decay_tol=decay_tol).values
    keep = np.abs(g) > mask * np.abs(g).max()
    with np.errstate(divide="ignore", invalid="ignore"):
        Rp = np.where(keep, G.values / g, np.nan)
        T = np.where(keep, F.values / den_T, np.nan)
    return Rp, T


def bandwidth(spec: Spectrum, level=1e-3):
    """Extent of the omega range where |values| exceeds ``level`` times the peak."""
    mag = np.abs(spec.values)
    idx = np.nonzero(mag > level * mag.max())[0]
    return float(spec.omega[idx[-1]] - spec.omega[idx[0]]) if idx.size else 0.0

