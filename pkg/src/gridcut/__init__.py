"""Minimum-cardinality hidden data attacks on DC state estimation, and defences."""

from .attack import INFEASIBLE, OPTIMAL, UNOBSERVABLE, AttackResult, optimal_attack, verify_hidden
from .errors import (
    DisconnectedError,
    ExhaustedError,
    GridcutError,
    InfeasibleError,
    LpInfeasible,
    ParseError,
    RankError,
    TooLargeError,
    ValidationError,
    VerificationFailure,
)
from .graph import AttackGraph, apply_protections, attack_graph, build_attack_graph
from .grid import (
    ANGLE,
    FLOW,
    GridTopology,
    Line,
    Measurement,
    MeasurementSet,
    Scenario,
    Source,
    build_measurement_matrix,
    expand_pmu,
    load_case,
    load_scenario,
    save_scenario,
)
from .mincut import CutResult, global_min_cut, label_sides
from .planner import PlanStep, greedy_pmu, greedy_protect

__version__ = "0.1.0"
