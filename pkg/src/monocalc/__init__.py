"""Monotone-operator calculus in finite-dimensional p-normed spaces."""
from .normed_space import DimensionError, NormedSpace, duality_map, eps_duality_gap
from .operator_core import (
    LinearMap, NonMonotoneError, NormalCone, OperatorSpec, SampledGraph, SingleValuedMap,
    SubdiffOracle, abs_operator, graph, identity, indicator_ball, indicator_box,
    is_monotone_graph, linear, min_monotonicity_gap, zero,
)
from .resolvent_engine import (
    InclusionSolution, SolverFailure, Yosida, moreau_yosida, sample_graph, solve_inclusion,
    solve_my_system, solve_translated_inclusion, verify_solution,
)
from .limit_probe import ACCEPT, INCONCLUSIVE, REJECT, ProbeReport, Schedule, liminf_probe
from .variational_calc import (
    Composition, LinearOp, MultivaluedEndpointError, RegularizedSum, ScheduleFamily,
    lift_eval, pointwise_sum_contains, regularized_sum_eval, variational_composition_probe,
    variational_sum_probe,
)
from .representability import (
    CertificateReport, GridSpec, certify_representative, fitzpatrick_value,
    fitzpatrick_values, representative_value,
)

__all__ = [
    "DimensionError",
    "NormedSpace",
    "duality_map",
    "eps_duality_gap",
    "LinearMap",
    "NonMonotoneError",
    "NormalCone",
    "OperatorSpec",
    "SampledGraph",
    "SingleValuedMap",
    "SubdiffOracle",
    "abs_operator",
    "graph",
    "identity",
    "indicator_ball",
    "indicator_box",
    "is_monotone_graph",
    "linear",
    "min_monotonicity_gap",
    "zero",
    "InclusionSolution",
    "SolverFailure",
    "Yosida",
    "moreau_yosida",
    "sample_graph",
    "solve_inclusion",
    "solve_my_system",
    "solve_translated_inclusion",
    "verify_solution",
    "ACCEPT",
    "INCONCLUSIVE",
    "REJECT",
    "ProbeReport",
    "Schedule",
    "liminf_probe",
    "Composition",
    "LinearOp",
    "MultivaluedEndpointError",
    "RegularizedSum",
    "ScheduleFamily",
    "lift_eval",
    "pointwise_sum_contains",
    "regularized_sum_eval",
    "variational_composition_probe",
    "variational_sum_probe",
    "CertificateReport",
    "GridSpec",
    "certify_representative",
    "fitzpatrick_value",
    "fitzpatrick_values",
    "representative_value",
]

__version__ = "0.1.0"
