import math
from dataclasses import replace

import numpy as np
import pytest

from memwave import analysis, configs
from memwave.core import ConfigError, TimeAxis, eval_packet
from memwave.timedomain import simulate


def test_free_energy_is_conserved():
    traj = simulate(configs.free_transport(T=3.0), stride=5)
    et = analysis.energy_trace(traj)
    drift = np.abs(et.total / et.total[0] - 1).max()
    assert drift < 1e-4
    assert abs(et.lambda_fit) < 1e-4


def test_zero_field_zero_trace():
    traj = simulate(configs.free_transport(T=0.5), stride=10)
    z = replace(traj, u=np.zeros_like(traj.u), v=np.zeros_like(traj.v))
    et = analysis.energy_trace(z)
    assert np.all(et.total == 0)
    assert et.lambda_fit == 0 and et.envelope_residual == 0


def test_envelope_bounds_the_trace():
    traj = simulate(configs.fig1(0.0, 0.0), stride=4)
    et = analysis.energy_trace(traj)
    logE = np.log(et.total)
    bound = logE[0] + et.lambda_fit * et.times + et.envelope_residual
    assert np.all(logE <= bound + 1e-12)
    assert np.isfinite(et.lambda_fit) and et.lambda_fit > 0  # bound state of the well grows


def test_free_transport_self_convergence_is_second_order():
    cfg = configs.free_transport()
    rep = analysis.convergence_study(cfg, exact=lambda x: eval_packet(cfg.packet, x - cfg.time.T))
    assert abs(rep.orders[0] - 2.0) <= 0.2
    assert rep.exact_errors[0] < 1e-3
    assert rep.exact_errors[1] < rep.exact_errors[0] / 3.5


def test_memory_convergence_is_first_order():
    rep = analysis.convergence_study(configs.cross_validation(dx=0.01))
    assert rep.orders[0] >= 1.0


def test_dt_refinement_alone_hits_the_spatial_floor():
    base = configs.free_transport()
    errs = []
    for k in range(4):
        c = replace(base, time=TimeAxis(base.dt / 2**k, (base.time.n_t - 1) * 2**k + 1))
        errs.append(analysis.free_transport_error(c))
    # dt/dx = 1/2 is the unit-Courant ratio of the two-level scheme, where time and
    # space dispersion cancel; smaller dt exposes the fixed-dx error, which levels off
    assert errs[0] < 1e-3 < errs[1]
    assert abs(errs[3] - errs[2]) < 0.1 * errs[3]
    assert errs[1] < errs[2] < errs[3]


def test_convergence_needs_three_levels_and_a_clear_cone():
    with pytest.raises(ConfigError):
        analysis.convergence_study(configs.free_transport(), levels=2)
    cfg = configs.free_transport()
    tight = replace(cfg, time=TimeAxis.from_duration(4.6, cfg.dt))
    with pytest.raises(ConfigError, match="cone violation at level 0"):
        analysis.convergence_study(tight)


def test_free_transport_error_requires_zero_coefficient():
    with pytest.raises(ConfigError):
        analysis.free_transport_error(configs.fig1())


def test_memoryless_reduction_identical_without_potential():
    rep = analysis.memoryless_reduction_check(configs.memoryless_barrier(V0=0.0, T=1.0), halvings=1)
    assert rep["identical"] and rep["pass"]
    assert max(rep["distance"]) < 1e-12


def test_memoryless_reduction_rejects_memory():
    with pytest.raises(ConfigError):
        analysis.memoryless_reduction_check(configs.cross_validation())


def test_potential_leapfrog_free_matches_packet():
    cfg = configs.memoryless_barrier(V0=0.0, T=2.0)
    u = analysis.potential_leapfrog(cfg)
    exact = eval_packet(cfg.packet, cfg.grid.points - cfg.time.T)
    assert np.linalg.norm(u - exact) / np.linalg.norm(exact) < 1e-3


@pytest.mark.parametrize("gamma", [0.5, 1.0, 3.0])
def test_memory_fixed_point_first_order(gamma):
    rows = [analysis.memory_fixed_point(gamma, dt) for dt in (0.02, 0.01, 0.005)]
    for r in rows:
        # dt / (1 - e^{-g dt}) = 1/g + dt/2 + O(dt^2)
        assert r["error"] == pytest.approx(r["dt"] / 2, rel=0.05)
    assert rows[0]["error"] / rows[1]["error"] == pytest.approx(2.0, rel=0.02)


def test_fig1_campaign_bounded_with_envelope():
    rep = analysis.fig1_campaign(stride=8)
    assert rep["pass"]
    for run in rep["runs"].values():
        assert math.isfinite(run["lambda_fit"])
        assert run["boundary_contact"] < 1e-3
