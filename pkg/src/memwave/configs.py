"""Named physical setups used by the validation campaigns and the CLI."""
import math
from dataclasses import replace

from .core import Grid1D, PermittivityModel, StepPotential, TimeAxis, WavePacket
from .timedomain import SimulationConfig

FIG1_POTENTIAL = StepPotential((-0.5, -0.25, 0.25, 0.5), (400.0, -50.0, 300.0))
FIG1_PAIRS = ((0.0, 0.0), (3.0, 2.0), (4.0, 10.0))


def fig1(gamma=3.0, alpha_p=2.0):
    """Three-cell potential, packet at x0=-2, L=pi, T=3.65, dx=0.01, dt=0.005."""
    return SimulationConfig(
        grid=Grid1D.symmetric(math.pi, 0.01),
        time=TimeAxis.from_duration(3.65, 0.005),
        packet=WavePacket(-2.0, 0.05, 10.0),
        model=PermittivityModel(FIG1_POTENTIAL, alpha_p=alpha_p, t0=2.0, gamma=gamma),
    )


def free_transport(T=3.0):
    """Three-cell panel numerics with the coefficient switched off."""
    return replace(fig1().free(), time=TimeAxis.from_duration(T, 0.005))


def barrier_model(V0, gamma=0.0, alpha_p=0.0, t0=0.0):
    return PermittivityModel(StepPotential.single_barrier(V0, 1.0), alpha_p=alpha_p, t0=t0, gamma=gamma)


def memoryless_barrier(V0=10.0, dx=0.01, dt=0.005, T=4.0):
    """Time-independent barrier V0 on [-1, 1] seen through the memory scheme (gamma=0)."""
    return SimulationConfig(
        grid=Grid1D.symmetric(6.0, dx),
        time=TimeAxis.from_duration(T, dt),
        packet=WavePacket(-3.0, 0.05, 10.0),
        model=barrier_model(V0),
        probe_left=-1.5, probe_right=1.5,
    )


def classical_oracle(V0=10.0, dx=0.01, dt=0.000625, T=30.0):
    """Long memoryless run for comparing empirical T, R+ with the transfer matrix.

    A wider packet (sigma_g=0.2) keeps little weight below the band of
    interest; the small time step controls the first-order memory error.
    """
    x0 = -4.0
    return SimulationConfig(
        grid=Grid1D.symmetric(T + abs(x0) + 1.0, dx),
        time=TimeAxis.from_duration(T, dt),
        packet=WavePacket(x0, 0.2, 10.0),
        model=barrier_model(V0),
        probe_left=-1.5, probe_right=1.5,
        potential_sampling="cell_average",
    )


def cross_validation(dx=0.005, T=11.0):
    """gamma=3, alpha_p=10, t0=2.5, single barrier V0=50 on [-1, 1]."""
    return SimulationConfig(
        grid=Grid1D.symmetric(12.5, dx),
        time=TimeAxis.from_duration(T, dx / 2),
        packet=WavePacket(-3.0, 0.05, 10.0),
        model=barrier_model(50.0, gamma=3.0, alpha_p=10.0, t0=2.5),
        probe_left=-1.5, probe_right=1.5,
    )


def shipped():
    """Every named configuration, keyed by name."""
    out = {f"fig1_g{g:g}_a{a:g}": fig1(g, a) for g, a in FIG1_PAIRS}
    out.update(
        free_transport=free_transport(),
        memoryless_barrier=memoryless_barrier(),
        classical_oracle=classical_oracle(),
        cross_validation=cross_validation(),
    )
    return out
