import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from dotenv import load_dotenv
load_dotenv()

import numpy as np
import pandas as pd

import database
from degench import __version__
from degench.artifacts import write_csv, write_json
from degench.asymptotics import (
    analytic_rates,
    asymptotic_bundle,
    exponential_matching_check,
    lambda_one_sided,
    lambda_pure,
    lambda_two_sided,
)
from degench.config import (
    SolverConfig,
    StabilityConfig,
    build,
    database_url,
    load_config_file,
    merge_settings,
    output_dir,
)
from degench.errors import DegenchError, InvalidArgument
from degench.graph import run_stationary_sweep, run_table_workflow
from degench.grid import DEFAULT_R_MIN, build_grid
from degench.mobility import MobilityKind
from degench.solver import CahnHilliardSolver, initial_state, mass, measure_interface, snapshot
from degench.stability import measure_decay_rate, table_spec
from degench.state import case_key
from degench.stationary import solve_stationary

logger = logging.getLogger("degench")

# mismatch constant for the eps^3 matching criterion
MATCHING_CONSTANT = 50.0
DESK_SCALE_EPSILON = 0.005


def parse_epsilon_sweep(text: str) -> list[float]:
    """'a:b:n' -> n equally spaced values from a to b."""
    try:
        a, b, n = text.split(":")
        values = np.linspace(float(a), float(b), int(n))
    except ValueError:
        raise InvalidArgument(f"epsilon sweep must look like a:b:n, got {text!r}") from None
    if int(n) < 1:
        raise InvalidArgument(f"epsilon sweep needs at least one point, got {text!r}")
    return [float(v) for v in values]


def parse_epsilon_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidArgument(f"epsilons must be a comma-separated list of numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value settings file; flags override it")
    common.add_argument("--out", help="output directory (default $DEGENCH_OUT or ./out)")
    common.add_argument("--workers", type=int, default=1, help="concurrent cases in sweeps")
    common.add_argument("--seed", type=int, default=None, help="reserved; every method is deterministic")

    parser = argparse.ArgumentParser(prog="degench", description="Degenerate Cahn-Hilliard validation suite")
    parser.add_argument("--version", action="version", version=f"degench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="radially symmetric phase-field run")
    sim.add_argument("--epsilon", type=float)
    sim.add_argument("--mobility")
    sim.add_argument("--r0", type=float)
    sim.add_argument("--amplitude", type=float, help="initial tanh amplitude (mass-neutral shift)")
    sim.add_argument("--t-end", type=float)
    sim.add_argument("--dt", type=float)
    sim.add_argument("--theta", type=float)
    sim.add_argument("--stabilization-s", type=float)
    sim.add_argument("--n-points", type=int)
    sim.add_argument("--r-min", type=float)
    sim.add_argument("--delta", type=float)
    sim.add_argument("--record-every", type=int)
    sim.add_argument("--no-mobility-splitting", dest="mobility_splitting", action="store_const", const=False)

    stat = sub.add_parser("stationary", parents=[common], help="stationary free-boundary shooting")
    group = stat.add_mutually_exclusive_group()
    group.add_argument("--epsilon", type=float)
    group.add_argument("--epsilon-sweep", metavar="A:B:N")
    stat.add_argument("--r0", type=float)
    stat.add_argument("--r-min", type=float)

    rates = sub.add_parser("rates", parents=[common], help="decay-rate tables")
    rates.add_argument("--table", type=int)
    rates.add_argument("--epsilons")
    rates.add_argument("--analytic-only", action="store_true")
    _add_stability_flags(rates)

    asym = sub.add_parser("asym", parents=[common], help="matched-asymptotic quantities")
    asym.add_argument("--epsilon", type=float)
    asym.add_argument("--kappa", type=float)
    asym.add_argument("--check-matching", action="store_true")
    asym.add_argument("--profiles", action="store_true", help="also write inner-profile tables")

    stab = sub.add_parser("stability", parents=[common], help="one linearised decay-rate case")
    stab.add_argument("--epsilon", type=float)
    stab.add_argument("--mobility")
    _add_stability_flags(stab)

    return parser


def _add_stability_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--m", type=int)
    parser.add_argument("--r0", type=float)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--n-points", type=int)
    parser.add_argument("--r-min", type=float)
    parser.add_argument("--t-end", type=float)
    parser.add_argument("--record-every", type=int)
    parser.add_argument("--floor", type=float)
    parser.add_argument("--growth-limit", type=float)
    parser.add_argument("--support-half-width", type=float)
    parser.add_argument("--base-state", choices=["dynamic", "shooting"])
    parser.add_argument("--base-dt", type=float)
    parser.add_argument("--base-tolerance", type=float)
    parser.add_argument("--initial-amplitude", type=float)


RESERVED = {"command", "config", "out", "workers", "seed"}


def resolve_settings(args: argparse.Namespace) -> dict:
    file_values = load_config_file(args.config) if args.config else {}
    flags = {k: v for k, v in vars(args).items() if k not in RESERVED}
    return merge_settings(file_values, flags)


def _get(settings: dict, key: str, default):
    value = settings.get(key)
    return default if value is None else value


def _require(parser: argparse.ArgumentParser, settings: dict, *keys: str) -> None:
    missing = [k for k in keys if settings.get(k) is None]
    if missing:
        parser.error("missing required setting(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def cmd_simulate(settings: dict, run_dir: Path, workers: int) -> list[Path]:
    epsilon = float(settings["epsilon"])
    mobility = MobilityKind.parse(settings["mobility"])
    config = build(SolverConfig, settings).resolve(epsilon)
    grid = build_grid(config.n_points, epsilon, config.r_min, config.delta)
    start = initial_state(grid, epsilon, mobility, _get(settings, "r0", 0.5), _get(settings, "amplitude", 1.0))

    final, series = CahnHilliardSolver(grid, epsilon, mobility, config).run(start)
    summary = {
        "t": final.time,
        "mass_initial": mass(start),
        "mass_final": mass(final),
        "r0": measure_interface(final),
        "max_u": float(np.max(final.u)),
        "u_at_1": float(final.u[0]),
    }
    return [
        write_csv(series, run_dir / "series.csv"),
        write_csv(snapshot(final), run_dir / "snapshot.csv"),
        write_json(summary, run_dir / "summary.json"),
    ]


def cmd_stationary(settings: dict, run_dir: Path, workers: int) -> list[Path]:
    r0 = float(_get(settings, "r0", 0.5))
    if not 0 < r0 < 1:
        raise InvalidArgument(f"r0 must lie in (0, 1), got {r0}")
    if settings.get("epsilon_sweep"):
        final = run_stationary_sweep(parse_epsilon_sweep(settings["epsilon_sweep"]), r0, workers)
        columns = ["epsilon", "sigma_num", "sigma_asym", "eta_num", "eta_asym"]
        frame = pd.DataFrame(final["report"], columns=columns)
        return [
            write_csv(frame, run_dir / "stationary_sweep.csv"),
            write_json({"r0": r0, "eta_order": final["eta_order"]}, run_dir / "summary.json"),
        ]
    solution = solve_stationary(r0, float(settings["epsilon"]), _get(settings, "r_min", DEFAULT_R_MIN))
    return [
        write_csv(solution.profile_frame(), run_dir / "profile.csv"),
        write_json(solution.summary(), run_dir / "summary.json"),
    ]


def cmd_rates(settings: dict, run_dir: Path, workers: int) -> list[Path]:
    if settings.get("analytic_only"):
        m = int(_get(settings, "m", 2))
        r0 = float(_get(settings, "r0", 0.5))
        rates = {
            "pure_2_3": lambda_pure(m, r0, Fraction(2, 3)),
            "one_sided": lambda_one_sided(m, r0),
            "two_sided": lambda_two_sided(m, r0),
            "pure_4_9": lambda_pure(m, r0, Fraction(4, 9)),
        }
        print(json.dumps({"m": m, "r0": r0, **rates}, indent=2))
        return [write_json({"m": m, "r0": r0, **rates}, run_dir / "analytic_rates.json")]

    if settings.get("table") is None:
        raise InvalidArgument("rates needs --table or --analytic-only")
    table = table_spec(settings["table"])
    epsilons = (
        parse_epsilon_list(str(settings["epsilons"]))
        if settings.get("epsilons") is not None
        else [e for e in table.published_values if e >= DESK_SCALE_EPSILON]
    )
    config = build(StabilityConfig, settings)
    final = run_table_workflow(table.table_id, epsilons, config, workers)

    paths = [write_csv(pd.DataFrame(final["report"]), run_dir / f"table{table.table_id}.csv")]
    for eps in final["epsilons"]:
        key = case_key(eps)
        paths.append(write_csv(final["series"][key], run_dir / f"series_eps{key}.csv"))
        paths.append(write_json(final["records"][key], run_dir / f"record_eps{key}.json"))
    return paths


def cmd_asym(settings: dict, run_dir: Path, workers: int) -> list[Path]:
    epsilon, kappa = float(settings["epsilon"]), float(settings["kappa"])
    bundle = asymptotic_bundle(epsilon, kappa)
    data = bundle.to_dict()
    if settings.get("check_matching"):
        mismatch = exponential_matching_check(epsilon, kappa)
        bound = MATCHING_CONSTANT * epsilon**3
        data["matching"] = {"mismatch": mismatch, "bound": bound, "passed": mismatch < bound}
        print(f"mismatch={mismatch:.6e} bound={bound:.6e} {'PASS' if mismatch < bound else 'FAIL'}")
    paths = [write_json(data, run_dir / "asymptotics.json")]
    if settings.get("profiles"):
        for name, frame in bundle.profile_tables().items():
            paths.append(write_csv(frame, run_dir / f"profile_{name}.csv"))
    return paths


def cmd_stability(settings: dict, run_dir: Path, workers: int) -> list[Path]:
    epsilon = float(settings["epsilon"])
    mobility = MobilityKind.parse(settings["mobility"])
    config = build(StabilityConfig, settings)
    record, series = measure_decay_rate(epsilon, mobility, config)
    data = record.to_dict()
    data["lambda_analytic"] = analytic_rates(mobility, config.m, config.r0)
    return [
        write_csv(series, run_dir / "series.csv"),
        write_json(data, run_dir / "record.json"),
    ]


COMMANDS = {
    "simulate": (cmd_simulate, ("epsilon", "mobility")),
    "stationary": (cmd_stationary, ()),
    "rates": (cmd_rates, ()),
    "asym": (cmd_asym, ("epsilon", "kappa")),
    "stability": (cmd_stability, ("epsilon", "mobility")),
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler, required = COMMANDS[args.command]

    try:
        settings = resolve_settings(args)
    except DegenchError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    _require(parser, settings, *required)
    if args.command == "stationary" and not (settings.get("epsilon") or settings.get("epsilon_sweep")):
        parser.error("stationary needs --epsilon or --epsilon-sweep")

    out = output_dir(args.out)
    out.mkdir(parents=True, exist_ok=True)
    database.init_db(database_url(out))
    recorded = {**settings, "workers": args.workers, "seed": args.seed}
    run_id = database.start_run(args.command, recorded, __version__)
    run_dir = out / run_id
    manifest = {
        "run_id": run_id,
        "subcommand": args.command,
        "version": __version__,
        "timestamp": database.get_run(run_id)["timestamp"],
        "config": recorded,
        "artifacts": [],
        "status": "running",
    }
    write_json(manifest, run_dir / "manifest.json")

    try:
        artifacts = handler(settings, run_dir, args.workers)
    except DegenchError as exc:
        logger.error("%s failed: %s", args.command, exc)
        database.fail_run(run_id, args.command, __version__, str(exc))
        write_json({**manifest, "status": "failed", "error": str(exc)}, run_dir / "manifest.json")
        return exc.exit_code
    except Exception as exc:
        logger.exception("%s crashed", args.command)
        database.fail_run(run_id, args.command, __version__, repr(exc))
        write_json({**manifest, "status": "failed", "error": repr(exc)}, run_dir / "manifest.json")
        return 3

    names = [str(p) for p in artifacts]
    database.finish_run(run_id, args.command, __version__, names)
    write_json({**manifest, "status": "finished", "artifacts": names}, run_dir / "manifest.json")
    print(f"[OK] {args.command} -> {run_dir}")
    return 0


if __name__ == "__main__":
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
        datefmt="%H:%M:%S",
    )
    sys.exit(main())
