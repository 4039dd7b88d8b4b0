"""distopt: distributed convex optimization over graphs, simulated with
continuous-time agent dynamics and discrete-time communication, plus a
certificate engine for the sufficient-condition constants."""

from . import certificates, costs, diagnostics, dynamics, errors, graph, scenarios, schedulers
from .certificates import CertificateReport, ConvexityBounds, certify
from .costs import CostModel, NetworkCost, catalog, minimize_global, network_cost, quadratic_cost
from .diagnostics import (
    AnalysisCoordinates,
    decay_check,
    lasalle_function,
    lyapunov_digraph,
    lyapunov_undirected,
    reconstruct_gradient,
    to_analysis_coords,
)
from .dynamics import (
    AlgorithmParams,
    NetworkState,
    SwitchingSchedule,
    Trace,
    equilibrium,
    euler_simulate,
    simulate,
)
from .graph import (
    DisagreementBasis,
    GraphSpectrum,
    WeightedDigraph,
    build_digraph,
    complement_basis,
    is_strongly_connected,
    is_weight_balanced,
    out_laplacian,
    preset_graph,
    spectral_summary,
)
from .scenarios import Scenario, parse_scenario, presets, scenario_from_dict
from .schedulers import (
    CentralizedEvent,
    Continuous,
    DistributedEvent,
    EulerScheme,
    EventStats,
    Periodic,
    cascade_resolve,
    centralized_trigger_check,
    distributed_trigger_check,
    event_stats,
    periodic_due,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmParams",
    "AnalysisCoordinates",
    "CentralizedEvent",
    "CertificateReport",
    "Continuous",
    "ConvexityBounds",
    "CostModel",
    "DisagreementBasis",
    "DistributedEvent",
    "EulerScheme",
    "EventStats",
    "GraphSpectrum",
    "NetworkCost",
    "NetworkState",
    "Periodic",
    "Scenario",
    "SwitchingSchedule",
    "Trace",
    "WeightedDigraph",
    "build_digraph",
    "cascade_resolve",
    "catalog",
    "centralized_trigger_check",
    "certificates",
    "certify",
    "complement_basis",
    "costs",
    "decay_check",
    "diagnostics",
    "distributed_trigger_check",
    "dynamics",
    "equilibrium",
    "errors",
    "euler_simulate",
    "event_stats",
    "graph",
    "is_strongly_connected",
    "is_weight_balanced",
    "lasalle_function",
    "lyapunov_digraph",
    "lyapunov_undirected",
    "minimize_global",
    "network_cost",
    "out_laplacian",
    "parse_scenario",
    "periodic_due",
    "preset_graph",
    "presets",
    "quadratic_cost",
    "reconstruct_gradient",
    "scenario_from_dict",
    "scenarios",
    "schedulers",
    "simulate",
    "spectral_summary",
    "to_analysis_coords",
]
