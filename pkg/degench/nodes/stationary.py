import logging

import pandas as pd

from degench.stationary import eta_convergence_order, stationary_sweep_row
from degench.state import SweepCaseState, SweepState, case_key

logger = logging.getLogger(__name__)


def stationary_case_node(state: SweepCaseState) -> dict:
    epsilon = float(state["epsilon"])
    key = case_key(epsilon)
    logger.info("[STATIONARY:%s] Shooting for r0=%g...", key, state["r0"])
    row = stationary_sweep_row(epsilon, state["r0"])
    logger.info(
        "[STATIONARY:%s] sigma=%.6f (asym %.6f) eta=%.8f (asym %.8f)",
        key, row["sigma_num"], row["sigma_asym"], row["eta_num"], row["eta_asym"],
    )
    return {"rows": {key: row}, "workflow_path": [f"stationary:{key}"]}


def sweep_report_node(state: SweepState) -> dict:
    rows = [state["rows"][case_key(e)] for e in sorted(state["epsilons"]) if case_key(e) in state["rows"]]
    order = float("nan")
    if len(rows) >= 2:
        order = eta_convergence_order(pd.DataFrame(rows))
    logger.info("[REPORT] Stationary sweep: %d row(s), eta defect order %.3f", len(rows), order)
    return {"report": rows, "eta_order": order, "workflow_path": ["report"]}
