import math

import pytest
from langgraph.types import Send

from degench.errors import InvalidArgument
from degench.graph import (
    compile_rates_graph,
    compile_stationary_graph,
    fan_out_cases,
    fan_out_stationary,
    run_stationary_sweep,
    run_table_workflow,
)


def test_compiled_graphs_have_expected_nodes():
    rates = set(compile_rates_graph().get_graph().nodes)
    sweep = set(compile_stationary_graph().get_graph().nodes)
    assert {"plan", "measure_case", "report"} <= rates
    assert {"plan", "stationary_case", "report"} <= sweep


def test_fan_out_sends_one_case_per_epsilon():
    sends = fan_out_cases({"table_id": 1, "epsilons": [0.01, 0.005], "settings": {"m": 2}})
    assert len(sends) == 2
    assert all(isinstance(s, Send) and s.node == "measure_case" for s in sends)
    assert [s.arg["epsilon"] for s in sends] == [0.01, 0.005]
    assert sends[0].arg["settings"] == {"m": 2}


def test_fan_out_without_cases_goes_to_report():
    assert fan_out_cases({"table_id": 1, "epsilons": [], "settings": {}}) == "report"
    assert fan_out_stationary({"r0": 0.5, "epsilons": []}) == "report"


def test_single_case_stationary_sweep():
    final = run_stationary_sweep([0.1], r0=0.5)
    assert len(final["report"]) == 1
    row = final["report"][0]
    assert row["epsilon"] == pytest.approx(0.1)
    assert final["workflow_path"] == ["plan", "stationary:0.1", "report"]
    assert math.isnan(final["eta_order"])


def test_sweep_rejects_empty_epsilons():
    with pytest.raises(InvalidArgument):
        run_stationary_sweep([], r0=0.5)


def test_sweep_rejects_r0_outside_domain():
    with pytest.raises(InvalidArgument):
        run_stationary_sweep([0.1], r0=1.5)


def test_unknown_table_fails_in_planning():
    with pytest.raises(InvalidArgument):
        run_table_workflow(7, [0.01])
