import json
import logging
import sys
import time

from dotenv import load_dotenv
load_dotenv()

import numpy as np

from degench.asymptotics import (
    asymptotic_bundle,
    lambda_one_sided,
    lambda_pure,
    lambda_two_sided,
    matching_order,
    profile_residuals,
)
from degench.config import SolverConfig, StabilityConfig
from degench.graph import run_stationary_sweep
from degench.grid import build_grid
from degench.mobility import MobilityKind
from degench.solver import CahnHilliardSolver, initial_state, mass, measure_interface
from degench.stability import TABLES, reproduce_table
from degench.stationary import solve_stationary

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
    datefmt="%H:%M:%S",
)

RUN_TABLES = "--tables" in sys.argv


def scenario_analytic_rates():
    values = {
        "pure_2_3": lambda_pure(2, 0.5, 2 / 3),
        "one_sided": lambda_one_sided(2, 0.5),
        "two_sided": lambda_two_sided(2, 0.5),
        "pure_4_9": lambda_pure(2, 0.5, 4 / 9),
    }
    passed = (
        abs(values["pure_2_3"] + 128) < 1e-9
        and abs(values["one_sided"] + 137.41) < 0.05
        and abs(values["two_sided"] + 148.08) < 0.05
        and abs(values["pure_4_9"] + 85.33) < 0.01
    )
    return passed, values


def scenario_closed_forms():
    residuals = profile_residuals(2.0)
    order, mismatches = matching_order([0.04, 0.02, 0.01], 2.0)
    ratios = [m / e**3 for m, e in zip(mismatches, [0.04, 0.02, 0.01])]
    passed = all(r < 1e-7 for r in residuals.values()) and order >= 2.7 and max(ratios) < 50
    return passed, {"residuals": residuals, "matching_order": order, "mismatch_over_eps3": ratios}


def scenario_stationary_sweep():
    epsilons = [0.02, 0.03, 0.05, 0.07, 0.1]
    start = time.time()
    final = run_stationary_sweep(epsilons, 0.5, workers=1)
    rows = final["report"]
    errors = [abs(r["eta_num"] - r["eta_asym"]) / r["eta_asym"] for r in rows]
    passed = errors[-1] <= 0.05 and final["eta_order"] >= 2.5
    return passed, {"rows": rows, "eta_order": final["eta_order"], "seconds": time.time() - start}


def scenario_solver_targets():
    eps = 0.05
    grid = build_grid(96, eps)
    config = SolverConfig(dt=1e-3, n_points=96)
    results = {}

    solver = CahnHilliardSolver(grid, eps, MobilityKind.QUADRATIC_POSITIVE_PART, config)
    start = initial_state(grid, eps, MobilityKind.QUADRATIC_POSITIVE_PART)
    state, _ = solver.run(start, t_end=200.0, observers=[])
    quad = state
    plateau = asymptotic_bundle(eps, 2.0).outer_plateau
    results["quad_max_u"] = float(np.max(state.u))
    results["quad_u_at_1"] = float(state.u[0])
    results["mass_drift"] = abs(mass(state) - mass(start)) / abs(mass(start))

    solver = CahnHilliardSolver(grid, eps, MobilityKind.ABSOLUTE_VALUE, config)
    start = initial_state(grid, eps, MobilityKind.ABSOLUTE_VALUE, amplitude=1.1)
    state, _ = solver.run(start, t_end=20.0, observers=[])
    inner = grid.nodes_physical < 0.4
    results["abs_max_u_inside"] = float(np.max(state.u[inner]))

    stationary = solve_stationary(measure_interface(quad), eps)
    outside = grid.nodes_physical >= stationary.r_star
    results["profile_gap"] = float(np.max(np.abs(quad.u[outside] - stationary(grid.nodes_physical[outside]))))
    passed = (
        results["quad_max_u"] <= 1.0 + 1e-3
        and abs(results["quad_u_at_1"] - (-1 + eps * 2.0 / 6)) < 0.005
        and results["mass_drift"] < 1e-5
        and results["abs_max_u_inside"] > 1.0
        and results["profile_gap"] < 1e-2
    )
    results["plateau_asym"] = plateau
    results["stationary_u_at_1"] = stationary.u_at_1
    return passed, results


def table_config(table, epsilon):
    """Coarser time steps than the published runs; the fit undoes the backward-Euler damping."""
    return StabilityConfig(
        n_points=240 if epsilon >= 0.01 else 320,
        dt=0.5 if epsilon >= 0.01 else 1.0,
        record_every=10,
        floor=1e-4,
        base_state="dynamic" if table.mobility is MobilityKind.ABSOLUTE_VALUE else "shooting",
        base_dt=0.05,
    )


def scenario_tables():
    out = {}
    passed = True
    for table_id, table in TABLES.items():
        epsilons = [0.01] if table_id != 1 else [0.01, 0.005]
        rows = []
        for eps in epsilons:
            frame = reproduce_table(table_id, [eps], table_config(table, eps))
            rows.extend(frame.to_dict(orient="records"))
            passed = passed and bool((frame["relative_error"] < 0.05).all())
        out[table_id] = rows
    return passed, out


scenarios = [
    ("analytic rates", scenario_analytic_rates),
    ("closed-form residuals and matching", scenario_closed_forms),
    ("stationary sweep", scenario_stationary_sweep),
    ("solver targets", scenario_solver_targets),
]
if RUN_TABLES:
    scenarios.append(("decay-rate tables", scenario_tables))

results = []
for i, (name, scenario) in enumerate(scenarios, 1):
    print(f"\n{'#' * 60}")
    print(f"[{i}/{len(scenarios)}] Running: {name}")
    print('#' * 60)
    start = time.time()
    try:
        passed, detail = scenario()
        error = ""
    except Exception as exc:
        passed, detail, error = False, {}, repr(exc)
    results.append({"scenario": name, "passed": passed, "seconds": time.time() - start, "detail": detail, "error": error})
    print(f"{'[OK]' if passed else '[X]'} {name} ({time.time() - start:.1f}s) {error}")

with open("results.json", "w") as f:
    json.dump(results, f, indent=2, default=str)

print(f"\nDone! Results saved to results.json")
sys.exit(0 if all(r["passed"] for r in results) else 1)
