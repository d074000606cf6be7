import operator
from typing import Annotated, Any, TypedDict


def merge_dicts(a: dict, b: dict) -> dict:
    return {**a, **b}


def case_key(epsilon: float) -> str:
    return repr(float(epsilon))


class RatesState(TypedDict):
    table_id: int
    epsilons: list[float]
    settings: dict[str, Any]  # StabilityConfig fields
    records: Annotated[dict, merge_dicts]  # {case_key: DecayRateRecord dict}
    series: Annotated[dict, merge_dicts]  # {case_key: DataFrame t, max_v1}
    workflow_path: Annotated[list[str], operator.add]
    report: list[dict]


class RateCaseState(TypedDict):
    """Minimal state sent to each parallel decay-rate case via Send."""
    table_id: int
    epsilon: float
    settings: dict[str, Any]


class SweepState(TypedDict):
    r0: float
    epsilons: list[float]
    rows: Annotated[dict, merge_dicts]  # {case_key: stationary_sweep_row}
    workflow_path: Annotated[list[str], operator.add]
    report: list[dict]
    eta_order: float


class SweepCaseState(TypedDict):
    epsilon: float
    r0: float
