import logging

from degench.config import StabilityConfig, build
from degench.errors import InvalidArgument
from degench.stability import table_spec
from degench.state import RatesState, SweepState

logger = logging.getLogger(__name__)


def _check_epsilons(epsilons) -> list[float]:
    values = [float(e) for e in epsilons]
    if not values:
        raise InvalidArgument("no epsilon values given")
    bad = [e for e in values if not 0 < e < 1]
    if bad:
        raise InvalidArgument(f"epsilon values must lie in (0, 1), got {bad}")
    return sorted(set(values), reverse=True)


def plan_table_node(state: RatesState) -> dict:
    """Step 1: resolve the table and validate the shared stability settings."""
    table = table_spec(state["table_id"])
    epsilons = _check_epsilons(state["epsilons"])
    build(StabilityConfig, state.get("settings", {}))

    logger.info(
        "[PLAN] table %d: %s mobility, %d case(s) eps=%s",
        table.table_id, table.mobility.value, len(epsilons), epsilons,
    )
    return {
        "table_id": table.table_id,
        "epsilons": epsilons,
        "workflow_path": ["plan"],
    }


def plan_sweep_node(state: SweepState) -> dict:
    r0 = float(state["r0"])
    if not 0 < r0 < 1:
        raise InvalidArgument(f"r0 must lie in (0, 1), got {r0}")
    epsilons = _check_epsilons(state["epsilons"])
    logger.info("[PLAN] stationary sweep r0=%g over %d epsilon value(s)", r0, len(epsilons))
    return {"r0": r0, "epsilons": epsilons, "workflow_path": ["plan"]}
