"""Hot loops, each with a numba version and a numpy version.

The public names at the bottom of the module point at whichever backend
``_accel`` selected.  Both versions are always importable so they can be
compared against each other in tests and benchmarks.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit, prange


# ----------------------------------------------------------------------------
# leapfrog time loop with the recursive memory term
# ----------------------------------------------------------------------------

def _leapfrog_numpy(u_prev, v_prev, u_cur, v_cur, m, coef, profile, decay, dt, dx,
                    probe_idx, probe_u, stride, snap_u, snap_v, limit):
    n_t = profile.shape[0]
    c2 = 1.0 / (dx * dx)
    two_i_dt = 2j * dt
    lap = np.zeros_like(u_cur)
    peak = 0.0
    last = 1
    for n in range(1, n_t - 1):
        m = decay * m + dt * v_cur
        lap[1:-1] = -(u_cur[2:] - 2.0 * u_cur[1:-1] + u_cur[:-2]) * c2
        u_next = u_prev + two_i_dt * v_cur
        v_next = v_prev + two_i_dt * (lap + (coef * profile[n]) * m)
        u_prev, v_prev, u_cur, v_cur = u_cur, v_cur, u_next, v_next
        last = n + 1
        probe_u[last, :] = u_cur[probe_idx]
        if stride > 0 and last % stride == 0:
            snap_u[last // stride] = u_cur
            snap_v[last // stride] = v_cur
        peak = max(peak, float(np.abs(u_cur).max()))
        if not peak <= limit:
            break
    return last, peak, u_prev, v_prev, u_cur, v_cur, m


@njit(cache=True)
def _leapfrog_numba(u_prev, v_prev, u_cur, v_cur, m, coef, profile, decay, dt, dx,
                    probe_idx, probe_u, stride, snap_u, snap_v, limit):
    n_t = profile.shape[0]
    n_x = u_cur.shape[0]
    c2 = 1.0 / (dx * dx)
    two_i_dt = 2j * dt
    u_prev = u_prev.copy()
    v_prev = v_prev.copy()
    u_cur = u_cur.copy()
    v_cur = v_cur.copy()
    m = m.copy()
    peak = 0.0
    last = 1
    for n in range(1, n_t - 1):
        pn = profile[n]
        step_peak = 0.0
        for j in range(n_x):
            m[j] = decay * m[j] + dt * v_cur[j]
        for j in range(n_x):
            if j == 0 or j == n_x - 1:
                lap = 0.0j
            else:
                lap = -(u_cur[j + 1] - 2.0 * u_cur[j] + u_cur[j - 1]) * c2
            un = u_prev[j] + two_i_dt * v_cur[j]
            vn = v_prev[j] + two_i_dt * (lap + coef[j] * pn * m[j])
            # the old level n-1 slot is reused for level n+1
            u_prev[j] = un
            v_prev[j] = vn
            a = abs(un)
            if a > step_peak:
                step_peak = a
        u_prev, u_cur = u_cur, u_prev
        v_prev, v_cur = v_cur, v_prev
        last = n + 1
        for k in range(probe_idx.shape[0]):
            probe_u[last, k] = u_cur[probe_idx[k]]
        if stride > 0 and last % stride == 0:
            s = last // stride
            for j in range(n_x):
                snap_u[s, j] = u_cur[j]
                snap_v[s, j] = v_cur[j]
        if step_peak > peak:
            peak = step_peak
        if not peak <= limit:
            break
    return last, peak, u_prev, v_prev, u_cur, v_cur, m


# ----------------------------------------------------------------------------
# pre-history quadrature  M0(x) = int_0^H exp(-gamma s) i g'(x + s) ds
# ----------------------------------------------------------------------------

def _prehistory_numpy(x, x0, sigma_g, lam, gamma, ds, n_s):
    out = np.zeros(x.shape, dtype=np.complex128)
    for k in range(n_s):
        w = 0.5 * ds if (k == 0 or k == n_s - 1) else ds
        y = x + k * ds - x0
        gp = (-2.0 * y / sigma_g + 1j * lam) * np.exp(-(y * y) / sigma_g + 1j * lam * y)
        out += (w * np.exp(-gamma * k * ds)) * gp
    return 1j * out


@njit(cache=True, parallel=True)
def _prehistory_numba(x, x0, sigma_g, lam, gamma, ds, n_s):
    n_x = x.shape[0]
    out = np.zeros(n_x, dtype=np.complex128)
    for j in prange(n_x):
        acc = 0.0j
        for k in range(n_s):
            w = 0.5 * ds if (k == 0 or k == n_s - 1) else ds
            y = x[j] + k * ds - x0
            q = y * y / sigma_g
            if q > 745.0:
                continue
            gp = (-2.0 * y / sigma_g + 1j * lam) * np.exp(-q + 1j * lam * y)
            acc += w * np.exp(-gamma * k * ds) * gp
        out[j] = 1j * acc
    return out


# ----------------------------------------------------------------------------
# outgoing free resolvent on a uniform x lattice, all frequencies at once
#   out[i, k] = (i / 2 z_k) sum_j exp(i z_k |x_i - x_j|) hw[j, k]
# hw already carries the quadrature weights.
# ----------------------------------------------------------------------------

def _resolvent_numpy(hw, zeta, dx):
    n_x = hw.shape[0]
    ph = np.exp(1j * zeta * dx)
    left = np.empty_like(hw)
    right = np.empty_like(hw)
    left[0] = hw[0]
    for i in range(1, n_x):
        left[i] = ph * left[i - 1] + hw[i]
    right[n_x - 1] = hw[n_x - 1]
    for i in range(n_x - 2, -1, -1):
        right[i] = ph * right[i + 1] + hw[i]
    return (0.5j / zeta) * (left + right - hw)


@njit(cache=True, parallel=True)
def _resolvent_numba(hw, zeta, dx):
    n_x, n_w = hw.shape
    out = np.empty_like(hw)
    for k in prange(n_w):
        z = zeta[k]
        ph = np.exp(1j * z * dx)
        scale = 0.5j / z
        acc = 0.0j
        for i in range(n_x):
            acc = ph * acc + hw[i, k]
            out[i, k] = acc
        acc = 0.0j
        for i in range(n_x - 1, -1, -1):
            acc = ph * acc + hw[i, k]
            out[i, k] = scale * (out[i, k] + acc - hw[i, k])
    return out


if HAVE_NUMBA:
    leapfrog_loop = _leapfrog_numba
    prehistory_quadrature = _prehistory_numba
    resolvent_sweep = _resolvent_numba
else:  # pragma: no cover - exercised with MEMWAVE_DISABLE_NUMBA=1
    leapfrog_loop = _leapfrog_numpy
    prehistory_quadrature = _prehistory_numpy
    resolvent_sweep = _resolvent_numpy
