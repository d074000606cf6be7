from degench.nodes.planning import plan_table_node, plan_sweep_node
from degench.nodes.case import measure_case_node
from degench.nodes.report import table_report_node
from degench.nodes.stationary import stationary_case_node, sweep_report_node

__all__ = [
    "plan_table_node",
    "plan_sweep_node",
    "measure_case_node",
    "table_report_node",
    "stationary_case_node",
    "sweep_report_node",
]
