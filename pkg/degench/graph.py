from dataclasses import asdict
from typing import Optional

from langgraph.graph import StateGraph, START, END
from langgraph.types import Send

from degench.config import StabilityConfig
from degench.state import RatesState, SweepState
from degench.nodes import (
    plan_table_node,
    plan_sweep_node,
    measure_case_node,
    table_report_node,
    stationary_case_node,
    sweep_report_node,
)


def fan_out_cases(state: RatesState):
    """One Send per epsilon; each case builds its own base state and grid."""
    if not state["epsilons"]:
        return "report"
    return [
        Send(
            "measure_case",
            {"table_id": state["table_id"], "epsilon": eps, "settings": state["settings"]},
        )
        for eps in state["epsilons"]
    ]


def fan_out_stationary(state: SweepState):
    if not state["epsilons"]:
        return "report"
    return [Send("stationary_case", {"epsilon": eps, "r0": state["r0"]}) for eps in state["epsilons"]]


def build_rates_workflow() -> StateGraph:
    """Build the decay-rate table StateGraph (not yet compiled)."""
    workflow = StateGraph(RatesState)

    workflow.add_node("plan", plan_table_node)
    workflow.add_node("measure_case", measure_case_node)
    workflow.add_node("report", table_report_node)

    workflow.add_edge(START, "plan")
    workflow.add_conditional_edges("plan", fan_out_cases, ["measure_case", "report"])
    workflow.add_edge("measure_case", "report")
    workflow.add_edge("report", END)

    return workflow


def build_stationary_workflow() -> StateGraph:
    """Build the stationary sigma/eta sweep StateGraph (not yet compiled)."""
    workflow = StateGraph(SweepState)

    workflow.add_node("plan", plan_sweep_node)
    workflow.add_node("stationary_case", stationary_case_node)
    workflow.add_node("report", sweep_report_node)

    workflow.add_edge(START, "plan")
    workflow.add_conditional_edges("plan", fan_out_stationary, ["stationary_case", "report"])
    workflow.add_edge("stationary_case", "report")
    workflow.add_edge("report", END)

    return workflow


def compile_rates_graph(checkpointer=None):
    return build_rates_workflow().compile(checkpointer=checkpointer)


def compile_stationary_graph(checkpointer=None):
    return build_stationary_workflow().compile(checkpointer=checkpointer)


def _invoke_config(workers: int) -> dict:
    return {"max_concurrency": max(1, int(workers))}


def run_table_workflow(
    table_id: int,
    epsilons: list[float],
    config: Optional[StabilityConfig] = None,
    workers: int = 1,
) -> dict:
    """Run every epsilon case of one table; returns the final graph state."""
    config = config or StabilityConfig()
    return compile_rates_graph().invoke(
        {
            "table_id": table_id,
            "epsilons": list(epsilons),
            "settings": asdict(config),
            "records": {},
            "series": {},
            "workflow_path": [],
            "report": [],
        },
        config=_invoke_config(workers),
    )


def run_stationary_sweep(epsilons: list[float], r0: float = 0.5, workers: int = 1) -> dict:
    return compile_stationary_graph().invoke(
        {
            "r0": r0,
            "epsilons": list(epsilons),
            "rows": {},
            "workflow_path": [],
            "report": [],
            "eta_order": float("nan"),
        },
        config=_invoke_config(workers),
    )
