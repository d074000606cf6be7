__version__ = "0.1.0"

from degench.errors import DegenchError, InvalidArgument, NumericalError
from degench.mobility import MobilityKind
from degench.grid import SpectralGrid, build_grid
from degench.solver import CahnHilliardSolver, PhaseFieldState
from degench.stationary import StationarySolution, solve_stationary
from degench.asymptotics import AsymptoticBundle, asymptotic_bundle
from degench.stability import DecayRateRecord, LinearizedProblem, reproduce_table
from degench.graph import compile_rates_graph, compile_stationary_graph

__all__ = [
    "__version__",
    "DegenchError",
    "InvalidArgument",
    "NumericalError",
    "MobilityKind",
    "SpectralGrid",
    "build_grid",
    "CahnHilliardSolver",
    "PhaseFieldState",
    "StationarySolution",
    "solve_stationary",
    "AsymptoticBundle",
    "asymptotic_bundle",
    "DecayRateRecord",
    "LinearizedProblem",
    "reproduce_table",
    "compile_rates_graph",
    "compile_stationary_graph",
]
