"""LT-code encoding, inactivation (ML) decoding over GF(2), and exact
finite-state analyses of the number of inactivations, cross-validated by a
seeded Monte Carlo harness."""

__version__ = "0.1.0"

from .degree import (
    DegreeDistribution,
    load_distribution,
    preset,
    resolve_distribution,
    sample_degree,
    validate,
)
from .graph import BipartiteGraph, ReducedDegreeView, encode, payload_encode
from .decoder import (
    BinaryMatrix,
    InactivationReport,
    assemble_permuted,
    back_substitute,
    decode,
    ge_solve,
    triangularize,
    zero_below,
)
from .analysis import (
    StatePmf2,
    TransitionKernelRow,
    cloud_membership_prob,
    compute_pu,
    expected_inactivations,
    initial_pmf,
    iterate_states,
    joint_cloud_to_ripple,
    make_kernel,
    ripple_departure_pmf,
    step,
)
from .distribution import (
    StatePmf3,
    cumulative,
    failure_lower_bound,
    inactivation_distribution,
    initial_pmf3,
    iterate_states3,
    step3,
)
from .sim import AggregateStats, ExperimentPlan, compare, epsilon_to_m, run

__all__ = [
    "DegreeDistribution",
    "load_distribution",
    "preset",
    "resolve_distribution",
    "sample_degree",
    "validate",
    "BipartiteGraph",
    "ReducedDegreeView",
    "encode",
    "payload_encode",
    "BinaryMatrix",
    "InactivationReport",
    "assemble_permuted",
    "back_substitute",
    "decode",
    "ge_solve",
    "triangularize",
    "zero_below",
    "StatePmf2",
    "TransitionKernelRow",
    "cloud_membership_prob",
    "compute_pu",
    "expected_inactivations",
    "initial_pmf",
    "iterate_states",
    "joint_cloud_to_ripple",
    "make_kernel",
    "ripple_departure_pmf",
    "step",
    "StatePmf3",
    "cumulative",
    "failure_lower_bound",
    "inactivation_distribution",
    "initial_pmf3",
    "iterate_states3",
    "step3",
    "AggregateStats",
    "ExperimentPlan",
    "compare",
    "epsilon_to_m",
    "run",
]
