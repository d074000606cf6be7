import logging
from dataclasses import replace

from degench.config import StabilityConfig, build
from degench.stability import measure_decay_rate, prepare_base_state, table_spec
from degench.state import RateCaseState, case_key

logger = logging.getLogger(__name__)


def measure_case_node(state: RateCaseState) -> dict:
    """Measure one decay rate in parallel. Receives minimal state via Send."""
    table = table_spec(state["table_id"])
    epsilon = float(state["epsilon"])
    config = replace(build(StabilityConfig, state["settings"]), initial_amplitude=table.initial_amplitude)
    key = case_key(epsilon)

    logger.info("[CASE:%s] Preparing %s base state...", key, table.mobility.value)
    base = prepare_base_state(epsilon, table.mobility, config.r0, config)
    logger.info("[CASE:%s] Base state ready at t=%.6g, evolving mode m=%d", key, base.time, config.m)

    record, series = measure_decay_rate(epsilon, table.mobility, config, base=base)
    logger.info("[CASE:%s] lambda=%.4f (published %s)", key, record.lambda_measured, table.published_values.get(epsilon, "n/a"))

    return {
        "records": {key: record.to_dict()},
        "series": {key: series},
        "workflow_path": [f"case:{key}"],
    }
