"""Randomized invariants."""
import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from memwave.cli import RunConfig, config_from_dict
from memwave.core import Grid1D, MemoryAccumulator, StepPotential, eval_potential
from memwave.freqdomain import CutoffPair, FrequencyLine, free_resolvent_apply, free_resolvent_dense, transfer_matrix_smatrix
from memwave.scattering import time_to_frequency
from memwave.timedomain import build_laplacian_apply, update_memory

finite = dict(allow_nan=False, allow_infinity=False)
cplx = st.complex_numbers(max_magnitude=10.0, **finite)


@given(st.lists(st.lists(cplx, min_size=3, max_size=3), min_size=1, max_size=40),
       st.floats(1e-4, 0.1))
def test_memory_without_decay_is_a_riemann_sum(rows, dt):
    v = np.array(rows)
    m = MemoryAccumulator(np.zeros(3, complex), 0.0, 0.0)
    for row in v:
        m = update_memory(m, row, dt)
    assert np.abs(m.m - dt * v.sum(axis=0)).max() <= 1e-12 * max(1.0, np.abs(v).sum())


@given(st.floats(0.0, 50.0), st.floats(1e-3, 0.05), st.integers(1, 200))
def test_memory_stays_below_its_fixed_point(gamma, dt, steps):
    m = MemoryAccumulator(np.zeros(1, complex), 0.0, gamma)
    for _ in range(steps):
        m = update_memory(m, np.ones(1), dt)
    limit = steps * dt
    if gamma * dt > 1e-12:
        limit = min(limit, dt / -math.expm1(-gamma * dt))
    assert 0 < m.m[0].real <= limit * (1 + 1e-12)


@given(st.floats(0.1, 3.0), st.floats(0.05, 3.0), st.lists(st.floats(-6, 6), min_size=1, max_size=50))
def test_cutoff_pair_invariants(R, gap, xs):
    cut = CutoffPair(R, R + gap)
    x = np.array(xs)
    rho = cut.rho(x)[0]
    rho1 = cut.rho1(x)
    assert np.all((0 <= rho) & (rho <= rho1) & (rho1 <= 1))
    assert np.all(rho * (1 - rho1) == 0)
    assert np.all(rho[np.abs(x) <= R] == 1)
    assert np.all(rho1[np.abs(x) >= R + gap] == 0)


@given(st.floats(0.1, 1.5), st.integers(2, 6).map(lambda k: 10.0 ** -k * 5))
def test_laplacian_plane_wave(kdx, dx):
    g = Grid1D(0.0, dx, 64)
    k = kdx / dx
    u = np.exp(1j * k * g.points)
    out = build_laplacian_apply(g)(u)
    lam = 4 / dx**2 * math.sin(kdx / 2) ** 2
    assert np.allclose(out[1:-1], lam * u[1:-1], rtol=1e-8, atol=1e-8 * lam)


@given(st.lists(st.floats(-200, 200), min_size=1, max_size=4), st.floats(0.5, 40.0))
@settings(max_examples=60)
def test_transfer_matrix_unitarity(values, lam):
    n = len(values)
    bp = tuple(np.linspace(-1.0, 1.0, n + 1))
    assume(all(abs(lam * lam - v) > 1e-6 for v in values))
    T, Rp, Rm = transfer_matrix_smatrix(StepPotential(bp, tuple(values)), lam)
    assert abs(abs(T) ** 2 + abs(Rp) ** 2 - 1) < 1e-9
    assert abs(abs(T) ** 2 + abs(Rm) ** 2 - 1) < 1e-9


@given(st.lists(st.floats(-1, 1), min_size=2, max_size=6, unique=True), st.floats(-2, 2))
def test_potential_right_closed_cells(points, x):
    bp = tuple(sorted(points))
    vals = tuple(float(j + 1) for j in range(len(bp) - 1))
    v = StepPotential(bp, vals)
    expected = 0.0
    for j in range(len(vals)):
        if bp[j] < x <= bp[j + 1]:
            expected = vals[j]
    assert eval_potential(v, x) == expected


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_fast_resolvent_matches_dense(seed):
    rng = np.random.default_rng(seed)
    g = Grid1D.symmetric(0.5, 0.025)
    line = FrequencyLine(float(rng.uniform(0.05, 2.0)), float(rng.uniform(1, 60)), 6)
    f = rng.standard_normal((g.n_x, 6)) + 1j * rng.standard_normal((g.n_x, 6))
    a = free_resolvent_apply(f, line, g)
    b = free_resolvent_dense(f, line, g)
    assert np.abs(a - b).max() <= 1e-10 * np.abs(b).max()


@given(cplx, cplx, st.integers(0, 2**32 - 1), st.floats(0.0, 2.0))
@settings(deadline=None)
def test_time_transform_is_linear(a, b, seed, sigma):
    rng = np.random.default_rng(seed)
    s = np.arange(0, 4, 0.02)
    env = np.exp(-(s - 2) ** 2 / 0.05)
    h1 = env * rng.standard_normal(s.size)
    h2 = env * rng.standard_normal(s.size)
    om = np.linspace(-20, 20, 9)
    lhs = time_to_frequency(s, a * h1 + b * h2, sigma, om).values
    rhs = a * time_to_frequency(s, h1, sigma, om).values + b * time_to_frequency(s, h2, sigma, om).values
    assert np.abs(lhs - rhs).max() <= 1e-10 * (1 + np.abs(lhs).max())


run_configs = st.fixed_dictionaries({
    "grid": st.fixed_dictionaries({"dx": st.sampled_from([0.01, 0.02])}),
    "packet": st.fixed_dictionaries({"lambda": st.floats(1, 30), "sigma_g": st.floats(0.01, 0.05)}),
    "model": st.fixed_dictionaries({
        "gamma": st.floats(0.5, 5.0),
        "alpha_p": st.floats(0.0, 20.0),
        "values": st.lists(st.one_of(st.floats(-500, 500), st.tuples(st.floats(-9, 9), st.floats(-9, 9)).map(list)),
                           min_size=3, max_size=3),
    }),
    "line": st.fixed_dictionaries({"sigma": st.floats(0.1, 2.0), "n_omega": st.sampled_from([64, 128, 256])}),
    "seed": st.integers(0, 10**6),
})


@given(run_configs)
@settings(deadline=None)
def test_run_config_round_trip(d):
    cfg = config_from_dict(d)
    again = config_from_dict(cfg.to_dict())
    assert again == cfg
    assert isinstance(again, RunConfig)
