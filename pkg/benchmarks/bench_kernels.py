"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--nx 629] [--nt 731]

Each pair is first checked for agreement, then timed (best of --repeat).
The numba timings exclude the first call, which pays for compilation.
"""
import argparse
import time

import numpy as np

from memwave import kernels
from memwave._accel import HAVE_NUMBA


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def leapfrog_case(nx, nt, dx=0.01, dt=0.005):
    rng = np.random.default_rng(1)
    x = np.linspace(-1, 1, nx)
    u0 = np.exp(-x**2 / 0.05) * np.exp(10j * x)
    v0 = 1j * np.gradient(u0, dx)
    coef = 1j * np.where(np.abs(x) < 0.5, 50.0, 0.0).astype(complex)
    profile = 1.0 + 0.1 * rng.standard_normal(nt)
    probe_idx = np.array([nx // 4, 3 * nx // 4])
    stride = 10

    def run(fn):
        probe_u = np.zeros((nt, 2), complex)
        n_snap = (nt - 1) // stride + 1
        snap_u = np.zeros((n_snap, nx), complex)
        snap_v = np.zeros((n_snap, nx), complex)
        return fn(u0.copy(), v0.copy(), u0.copy(), v0.copy(), np.zeros(nx, complex), coef,
                  profile, np.exp(-3 * dt), dt, dx, probe_idx, probe_u, stride, snap_u, snap_v, 1e30)[4]

    return run


def prehistory_case(nx, n_s=2000):
    x = np.linspace(-3, 3, nx)

    def run(fn):
        return fn(x, -2.0, 0.05, 10.0, 3.0, 0.005, n_s)

    return run


def resolvent_case(nx, n_omega=256):
    rng = np.random.default_rng(2)
    hw = rng.standard_normal((nx, n_omega)) + 1j * rng.standard_normal((nx, n_omega))
    zeta = np.linspace(-80, 80, n_omega) + 0.5j

    def run(fn):
        return fn(hw, zeta, 0.005)

    return run


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--nx", type=int, default=629)
    p.add_argument("--nt", type=int, default=731)
    a = p.parse_args(argv)
    cases = [
        ("leapfrog", leapfrog_case(a.nx, a.nt), kernels._leapfrog_numpy, kernels._leapfrog_numba),
        ("prehistory", prehistory_case(a.nx), kernels._prehistory_numpy, kernels._prehistory_numba),
        ("resolvent", resolvent_case(2 * a.nx), kernels._resolvent_numpy, kernels._resolvent_numba),
    ]
    if not HAVE_NUMBA:
        print("numba unavailable or disabled; both columns run the numpy code")
    print(f"{'kernel':<12}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}{'max diff':>12}")
    for name, run, f_np, f_nb in cases:
        run(f_nb)  # compile
        t_np, r_np = best_of(lambda: run(f_np), a.repeat)
        t_nb, r_nb = best_of(lambda: run(f_nb), a.repeat)
        diff = float(np.abs(r_np - r_nb).max() / max(np.abs(r_np).max(), 1e-300))
        print(f"{name:<12}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
