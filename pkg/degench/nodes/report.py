import logging

from degench.stability import table_spec
from degench.state import RatesState, case_key

logger = logging.getLogger(__name__)


def table_report_node(state: RatesState) -> dict:
    """Step 3: line up measured, published and closed-form rates per epsilon."""
    table = table_spec(state["table_id"])
    records = state.get("records", {})
    missing = [e for e in state["epsilons"] if case_key(e) not in records]
    if missing:
        logger.warning("[REPORT] No record for eps=%s", missing)

    rows = []
    for epsilon in state["epsilons"]:
        record = records.get(case_key(epsilon))
        if record is None:
            continue
        published = table.published_values.get(epsilon)
        row = {
            "table": table.table_id,
            "mobility": table.mobility.value,
            "m": record["m"],
            "epsilon": epsilon,
            "lambda_measured": record["lambda_measured"],
            "lambda_published": published,
            "relative_error": None if published is None else abs(record["lambda_measured"] - published) / abs(published),
            "fit_residual": record["fit_residual"],
        }
        row.update({f"lambda_{name}": value for name, value in record["lambda_analytic"].items()})
        rows.append(row)

    logger.info("[REPORT] Table %d: %d row(s)", table.table_id, len(rows))
    return {"report": rows, "workflow_path": ["report"]}
