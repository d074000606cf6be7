import math

import numpy as np
import pandas as pd
import pytest

from degench.config import StabilityConfig
from degench.errors import InvalidArgument, NoConvergence, UnstableMode
from degench.grid import build_grid
from degench.mobility import MobilityKind
from degench.solver import measure_interface
from degench.stability import (
    TABLES,
    LinearizedProblem,
    evolve_linearized,
    fit_decay_rate,
    initial_perturbation,
    prepare_base_state,
    reproduce_table,
    table_spec,
)

EPS = 0.1
QUAD = MobilityKind.QUADRATIC_POSITIVE_PART


@pytest.fixture(scope="module")
def grid():
    return build_grid(32, EPS, delta=0.5)


@pytest.fixture(scope="module")
def problem(grid):
    # constant base inside the convex part of the well: every mode decays
    return LinearizedProblem(np.full(grid.n_points, 0.9), 2, EPS, QUAD, grid)


@pytest.fixture
def bump(grid):
    return initial_perturbation(grid, 0.5, 0.1)


def test_bump_shape(grid, bump):
    r = grid.nodes_physical
    outside = np.abs(r - 0.5) >= 0.1
    assert np.all(bump[outside] == 0.0)
    assert np.all(bump[~outside] >= 0.0)
    assert bump[np.abs(r - 0.5) < 0.05].min() > 0.0
    assert bump.max() <= 1.0


def test_bump_peak_is_one():
    grid = build_grid(33, EPS, delta=0.5)
    centre = grid.nodes_physical[16]
    v = initial_perturbation(grid, centre, 0.1)
    assert v[16] == 1.0


def test_bump_support_must_clear_free_boundary(grid):
    with pytest.raises(InvalidArgument):
        initial_perturbation(grid, 0.5, 0.1, r_star=0.45)
    with pytest.raises(InvalidArgument):
        initial_perturbation(grid, 0.5, 0.0)
    with pytest.raises(InvalidArgument):
        initial_perturbation(grid, 0.95, 0.1)


def test_problem_validation(grid):
    with pytest.raises(InvalidArgument):
        LinearizedProblem(np.zeros(5), 2, EPS, QUAD, grid)
    with pytest.raises(InvalidArgument):
        LinearizedProblem(np.zeros(grid.n_points), -1, EPS, QUAD, grid)


def test_radial_mode_with_constant_mobility_annihilates_constants(grid):
    flat = LinearizedProblem(np.zeros(grid.n_points), 0, EPS, QUAD, grid)
    np.testing.assert_allclose(flat.flux_operator @ np.ones(grid.n_points), 0.0, atol=1e-9)


def test_zero_perturbation_stays_zero(problem, grid):
    config = StabilityConfig(dt=1e-3, t_end=0.1)
    series = evolve_linearized(problem, np.zeros(grid.n_points), config)
    assert list(series.columns) == ["t", "max_v1"]
    assert series["max_v1"].eq(0.0).all()
    assert series["t"].iloc[-1] == pytest.approx(0.1)


def test_trajectory_is_linear_in_the_initial_amplitude(problem, bump):
    config = StabilityConfig(dt=1e-3, t_end=0.05, record_every=5)
    one = evolve_linearized(problem, bump, config)
    ten = evolve_linearized(problem, 10.0 * bump, config)
    np.testing.assert_array_equal(one["t"], ten["t"])
    np.testing.assert_allclose(ten["max_v1"], 10.0 * one["max_v1"], rtol=1e-10)


def test_stops_at_the_amplitude_floor(problem, bump):
    config = StabilityConfig(dt=1e-3, t_end=1.0, record_every=50, floor=0.5)
    series = evolve_linearized(problem, bump, config)
    assert series["t"].iloc[-1] < 1.0
    assert series["max_v1"].iloc[-1] < 0.5 * series["max_v1"].iloc[0]


def test_growth_beyond_limit_is_reported(problem, bump):
    config = StabilityConfig(dt=1e-3, t_end=0.01, growth_limit=1e-3)
    with pytest.raises(UnstableMode):
        evolve_linearized(problem, bump, config)


def _series(t, amp):
    return pd.DataFrame({"t": t, "max_v1": amp})


def test_fit_exact_exponential():
    t = np.linspace(0.0, 10.0, 1001)
    record = fit_decay_rate(_series(t, np.exp(-5.0 * t)), 1.0)
    assert record.lambda_measured == pytest.approx(-5.0, abs=1e-8)
    assert record.fit_residual < 1e-10
    scaled = fit_decay_rate(_series(t, np.exp(-5.0 * t)), 0.1)
    assert scaled.lambda_measured == pytest.approx(-500.0, rel=1e-8)


def test_fit_picks_the_late_window_of_a_two_mode_signal():
    t = np.linspace(0.0, 10.0, 1001)
    record = fit_decay_rate(_series(t, np.exp(-5.0 * t) + 0.1 * np.exp(-20.0 * t)), 1.0)
    assert record.lambda_measured == pytest.approx(-5.0, rel=5e-3)
    assert record.fit_window[0] > 0.0
    assert record.fit_window[1] == 10.0


def test_backward_euler_correction_recovers_the_continuous_rate():
    dt = 0.01
    k = np.arange(0, 1001)
    amp = (1.0 / (1.0 + 5.0 * dt)) ** k
    record = fit_decay_rate(_series(k * dt, amp), 1.0, dt=dt)
    assert record.lambda_measured == pytest.approx(-5.0, rel=1e-9)


def test_fit_requires_enough_decay():
    t = np.linspace(0.0, 10.0, 101)
    with pytest.raises(NoConvergence):
        fit_decay_rate(_series(t, np.exp(-0.01 * t)), 0.1)


def test_fit_attaches_analytic_rates():
    t = np.linspace(0.0, 10.0, 1001)
    record = fit_decay_rate(_series(t, np.exp(-5.0 * t)), 1.0, m=2, r0=0.5, mobility="quad-pos")
    assert set(record.lambda_analytic) == {"pure", "one_sided"}
    data = record.to_dict()
    assert data["mobility"] == "quad-pos"
    assert isinstance(data["fit_window"], list)


def test_table_definitions():
    assert TABLES[1].mobility is QUAD
    assert TABLES[1].published_values[0.01] == -133.2
    assert TABLES[2].initial_amplitude == 1.1
    assert TABLES[3].comparison == "pure"
    with pytest.raises(InvalidArgument):
        table_spec(4)
    with pytest.raises(InvalidArgument):
        reproduce_table(7, [0.01])


def test_shooting_base_state_rejects_abs_mobility():
    config = StabilityConfig(base_state="shooting", n_points=32)
    with pytest.raises(InvalidArgument):
        prepare_base_state(0.05, "abs", 0.5, config)


def desk_config(n_points, dt, **overrides):
    # stop well above the level where the frozen inner region shows up in max|v|
    return StabilityConfig(n_points=n_points, dt=dt, record_every=10, floor=1e-4, **overrides)


def test_shooting_base_state_has_its_interface_at_the_target():
    state = prepare_base_state(0.1, QUAD, 0.5, StabilityConfig(base_state="shooting", n_points=64))
    assert measure_interface(state) == pytest.approx(0.5, abs=1e-3)
    assert state.u.max() <= 1.0 + 1e-8
    assert state.time == 0.0


@pytest.mark.slow
def test_table_one_row_at_desk_scale():
    frame = reproduce_table(1, [0.01], desk_config(240, 0.5, base_state="shooting"))
    row = frame.iloc[0]
    assert math.isclose(row["lambda_measured"], -133.2, rel_tol=0.05)
    assert row["lambda_one_sided"] == pytest.approx(-137.41, abs=0.05)
    assert row["fit_residual"] < 0.01


@pytest.mark.slow
def test_table_one_row_at_smaller_epsilon():
    frame = reproduce_table(1, [0.005], desk_config(320, 1.0, base_state="shooting"))
    assert math.isclose(frame.iloc[0]["lambda_measured"], -133.8, rel_tol=0.05)


@pytest.mark.slow
def test_table_two_row_with_overshooting_base_state():
    config = desk_config(160, 0.5, base_dt=0.05)
    frame = reproduce_table(2, [0.01], config)
    row = frame.iloc[0]
    assert row["mobility"] == "abs"
    assert math.isclose(row["lambda_measured"], -144.7, rel_tol=0.05)
    assert "lambda_two_sided" in row


@pytest.mark.slow
def test_table_three_row():
    frame = reproduce_table(3, [0.01], desk_config(240, 0.5, base_state="shooting"))
    row = frame.iloc[0]
    assert math.isclose(row["lambda_measured"], -84.6, rel_tol=0.05)
    assert "lambda_one_sided" not in row


@pytest.mark.slow
def test_translation_mode_decays_much_slower_than_m2():
    eps = 0.02
    base = prepare_base_state(eps, QUAD, 0.5, StabilityConfig(base_state="shooting", n_points=160))
    r0 = measure_interface(base)
    bump = initial_perturbation(base.grid, r0, 3 * eps)
    config = StabilityConfig(dt=0.05, t_end=150.0, record_every=20, floor=0.0)

    def late_slope(m):
        series = evolve_linearized(LinearizedProblem(base.u, m, eps, QUAD, base.grid), bump, config)
        late = series[series["t"] >= 50.0]
        slope, _ = np.polyfit(late["t"], np.log(late["max_v1"]), 1)
        return slope

    m2 = late_slope(2)
    assert m2 < 0
    assert 10 * abs(late_slope(1)) <= abs(m2)
