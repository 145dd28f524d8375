import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from memwave.core import (
    ConfigError,
    Grid1D,
    PermittivityModel,
    StepPotential,
    TimeAxis,
    WavePacket,
    cell_average_potential,
    eval_a,
    eval_packet,
    eval_packet_derivative,
    eval_potential,
    sample_potential,
)

PKT = WavePacket(-2.0, 0.05, 10.0)
SMALL = StepPotential((-0.4, -0.2, 0.2, 0.4), (10.0, 2.0, 20.0))


def test_packet_center_is_one():
    assert eval_packet(PKT, -2.0) == pytest.approx(1.0 + 0j, abs=1e-15)


def test_packet_off_center_matches_closed_form():
    # exp(-(0.1)^2/0.05) = exp(-0.2), phase exp(10i * -0.1) = exp(-i)
    expected = cmath.exp(-0.2) * cmath.exp(-1j)
    assert abs(eval_packet(PKT, -2.1) - expected) < 1e-14


def test_packet_derivative_at_center():
    assert abs(eval_packet_derivative(PKT, -2.0) - 10j) < 1e-12


def test_packet_derivative_against_finite_difference():
    x = np.linspace(-2.5, -1.5, 41)
    h = 1e-6
    fd = (eval_packet(PKT, x + h) - eval_packet(PKT, x - h)) / (2 * h)
    assert np.abs(fd - eval_packet_derivative(PKT, x)).max() < 1e-6


def test_packet_decays_far_away():
    assert abs(eval_packet(PKT, PKT.x0 + 10)) < 1e-30
    assert abs(eval_packet_derivative(PKT, PKT.x0 - 10)) < 1e-30


def test_packet_rejects_nonpositive_width():
    with pytest.raises(ConfigError):
        WavePacket(0.0, -1.0, 10.0)


@pytest.mark.parametrize("x, expected", [(0.0, 2.0), (0.2, 2.0), (-1.0, 0.0), (0.3, 20.0), (-0.3, 10.0),
                                         (-0.4, 0.0), (0.4, 20.0)])
def test_potential_cells_are_closed_on_the_right(x, expected):
    assert eval_potential(SMALL, x) == expected


def test_potential_vectorized_matches_scalar():
    x = np.linspace(-1, 1, 57)
    vec = eval_potential(SMALL, x)
    assert np.array_equal(vec, np.array([eval_potential(SMALL, xi) for xi in x]))


def test_potential_validation():
    with pytest.raises(ConfigError):
        StepPotential((0.0, 1.0), (1.0, 2.0))
    with pytest.raises(ConfigError):
        StepPotential((1.0, 0.0), (1.0,))


def test_cell_average_uses_exact_overlap():
    # barrier [0, 0.25] on cells of width 0.1 centred at 0, 0.1, 0.2, 0.3
    v = StepPotential((0.0, 0.25), (4.0,))
    g = Grid1D(-0.3, 0.1, 8)
    avg = cell_average_potential(v, g)
    x = g.points
    j = {round(float(xi), 6): k for k, xi in enumerate(x)}
    assert avg[j[0.0]].real == pytest.approx(2.0)
    assert avg[j[0.1]].real == pytest.approx(4.0)
    assert avg[j[0.2]].real == pytest.approx(4.0)
    assert avg[j[0.3]].real == pytest.approx(0.0)
    # total mass is conserved exactly
    assert float(np.sum(avg.real) * g.dx) == pytest.approx(4.0 * 0.25)


def test_sample_potential_modes():
    g = Grid1D.symmetric(1.0, 0.05)
    assert np.array_equal(sample_potential(SMALL, g), eval_potential(SMALL, g.points))
    with pytest.raises(ConfigError):
        sample_potential(SMALL, g, "bogus")


def test_coefficient_constant_profile():
    m = PermittivityModel(StepPotential.single_barrier(7.0), alpha_p=0.0, t0=1.0, gamma=0.0)
    for t in (0.0, 3.0, -5.0):
        assert eval_a(m, 0.0, t) == 7.0


def test_coefficient_peaks_at_t0():
    m = PermittivityModel(SMALL, alpha_p=3.0, t0=1.5, gamma=1.0)
    assert eval_a(m, 0.3, 1.5) == 20.0
    assert abs(eval_a(m, 0.3, 2.0)) < 20.0


def test_model_radius_defaults_to_extent():
    m = PermittivityModel(SMALL)
    assert m.R == pytest.approx(0.4)
    with pytest.raises(ConfigError):
        PermittivityModel(SMALL, R=0.3)


def test_grid_colon_convention():
    g = Grid1D.symmetric(math.pi, 0.01)
    assert g.n_x == 629
    assert g.x_min == -math.pi
    assert g.x_max <= math.pi
    assert g.index_of(g.points[17]) == 17
    with pytest.raises(ConfigError):
        g.index_of(10.0)


def test_time_axis_counts_levels():
    t = TimeAxis.from_duration(3.65, 0.005)
    assert t.n_t == 731
    assert t.T == pytest.approx(3.65)
    assert Fraction(t.cfl_ratio(Grid1D(0, 0.01, 5))).limit_denominator(10) == Fraction(1, 2)
