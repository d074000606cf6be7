import numpy as np
import pytest

from degench.config import SolverConfig
from degench.errors import Diverged, InvalidArgument, NoInterface
from degench.grid import build_grid
from degench.mobility import MobilityKind
from degench.solver import (
    CahnHilliardSolver,
    PhaseFieldState,
    chemical_potential,
    energy,
    initial_state,
    mass,
    measure_interface,
    run,
    step,
    tanh_profile,
)

EPS = 0.1
QUAD = MobilityKind.QUADRATIC_POSITIVE_PART


@pytest.fixture(scope="module")
def grid():
    return build_grid(48, EPS, delta=0.5)


@pytest.fixture
def config():
    return SolverConfig(dt=1e-3, n_points=48, t_end=0.05, record_every=10)


def test_state_validates_shape_and_freezes(grid):
    with pytest.raises(InvalidArgument):
        PhaseFieldState(grid, np.zeros(3), 0.0, EPS, QUAD)
    state = PhaseFieldState(grid, np.zeros(grid.n_points), 0.0, EPS, "abs")
    assert state.mobility is MobilityKind.ABSOLUTE_VALUE
    with pytest.raises(ValueError):
        state.u[0] = 1.0


def test_overshooting_profile_keeps_mass(grid):
    base = tanh_profile(grid, EPS)
    over = tanh_profile(grid, EPS, amplitude=1.1)
    assert grid.mass(over) == pytest.approx(grid.mass(base), abs=1e-13)
    assert over.max() > 1.0


def test_interface_of_tanh_profile(grid):
    state = initial_state(grid, EPS, QUAD, r0=0.45)
    assert measure_interface(state) == pytest.approx(0.45, abs=1e-8)


def test_no_interface(grid):
    state = PhaseFieldState(grid, -np.ones(grid.n_points), 0.0, EPS, QUAD)
    with pytest.raises(NoInterface):
        measure_interface(state)


@pytest.mark.parametrize("value", [-1.0, -0.3, 0.7, 1.0])
def test_constant_states_are_fixed_points(grid, config, value):
    state = PhaseFieldState(grid, np.full(grid.n_points, value), 0.0, EPS, QUAD)
    solver = CahnHilliardSolver(grid, EPS, QUAD, config)
    for _ in range(5):
        state = solver.step(state)
    np.testing.assert_allclose(state.u, value, atol=1e-10)
    assert state.time == pytest.approx(5e-3)


def test_mass_is_conserved(grid, config):
    start = initial_state(grid, EPS, QUAD)
    final, _ = CahnHilliardSolver(grid, EPS, QUAD, config).run(start, t_end=0.3, observers=[])
    assert abs(mass(final) - mass(start)) < 1e-6 * abs(mass(start))


def test_energy_does_not_increase(grid, config):
    start = initial_state(grid, EPS, QUAD)
    final, _ = CahnHilliardSolver(grid, EPS, QUAD, config).run(start, t_end=0.05, observers=[])
    assert energy(final) <= energy(start) + 1e-10


def test_run_records_observables(grid, config):
    start = initial_state(grid, EPS, QUAD)
    final, series = run(start, config)
    assert list(series.columns) == ["t", "mass", "r0", "max_u", "r_star", "energy"]
    assert len(series) == 6
    assert series["t"].iloc[-1] == pytest.approx(0.05)
    assert final.time == pytest.approx(0.05)


def test_module_step_matches_solver(grid, config):
    start = initial_state(grid, EPS, QUAD)
    a = step(start, config)
    b = CahnHilliardSolver(grid, EPS, QUAD, config).step(start)
    np.testing.assert_array_equal(a.u, b.u)


def test_unsplit_mobility_is_consistent(grid):
    start = initial_state(grid, EPS, QUAD)
    split = SolverConfig(dt=1e-4, n_points=48)
    full = SolverConfig(dt=1e-4, n_points=48, mobility_splitting=False)
    a, b = start, start
    for _ in range(10):
        a = step(a, split)
        b = step(b, full)
    np.testing.assert_allclose(a.u, b.u, atol=1e-9)


def test_split_operator_equals_full_mobility_operator(grid):
    u = tanh_profile(grid, EPS)
    split = CahnHilliardSolver(grid, EPS, QUAD, SolverConfig(dt=1e-3, n_points=48, theta=0.05))
    full = CahnHilliardSolver(grid, EPS, QUAD, SolverConfig(dt=1e-3, n_points=48, mobility_splitting=False))
    reference = full.mobility_operator(u)
    np.testing.assert_allclose(split.mobility_operator(u), reference, atol=1e-12 * np.abs(reference).max())


def test_implicit_flux_damps_a_large_step(grid):
    start = initial_state(grid, EPS, QUAD)
    solver = CahnHilliardSolver(grid, EPS, QUAD, SolverConfig(dt=0.05, n_points=48))
    state = start
    for _ in range(20):
        state = solver.step(state)
    assert np.all(np.isfinite(state.u))
    assert np.max(np.abs(state.u)) < 1.5
    assert energy(state) <= energy(start)


def test_blow_up_is_reported(grid, config):
    state = PhaseFieldState(grid, np.full(grid.n_points, 20.0), 0.0, EPS, QUAD)
    with pytest.raises(Diverged):
        CahnHilliardSolver(grid, EPS, QUAD, config).step(state)


def test_chemical_potential_of_constant(grid):
    state = PhaseFieldState(grid, np.full(grid.n_points, 0.5), 0.0, EPS, QUAD)
    np.testing.assert_allclose(chemical_potential(state), 2 * 0.125 - 1.0, atol=1e-9)


def test_negative_horizon_rejected(grid, config):
    start = initial_state(grid, EPS, QUAD)
    with pytest.raises(InvalidArgument):
        CahnHilliardSolver(grid, EPS, QUAD, config).run(start, t_end=-1.0)


@pytest.mark.slow
def test_long_run_stays_below_one_with_positive_part_mobility():
    eps = 0.05
    grid = build_grid(96, eps)
    start = initial_state(grid, eps, QUAD)
    solver = CahnHilliardSolver(grid, eps, QUAD, SolverConfig(dt=1e-3, n_points=96))
    final, _ = solver.run(start, t_end=50.0, observers=[])
    assert final.u.max() <= 1.0 + 1e-3
    assert final.u[0] == pytest.approx(-1 + eps * 2 / 6, abs=0.005)


@pytest.mark.slow
def test_absolute_mobility_keeps_overshoot_inside():
    eps = 0.05
    grid = build_grid(64, eps)
    start = initial_state(grid, eps, MobilityKind.ABSOLUTE_VALUE, amplitude=1.1)
    solver = CahnHilliardSolver(grid, eps, MobilityKind.ABSOLUTE_VALUE, SolverConfig(dt=1e-3, n_points=64))
    final, _ = solver.run(start, t_end=5.0, observers=[])
    inside = grid.nodes_physical < 0.4
    assert final.u[inside].max() > 1.0
    assert abs(mass(final) - mass(start)) < 1e-6 * abs(mass(start))
