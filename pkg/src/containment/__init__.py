"""Misinformation containment with multiple competing cascades and per-node priorities."""

from containment.errors import CapacityError, ContainmentError, ParseError, ValidationError
from containment.graph import (
    ActivityBased,
    DirectedGraph,
    FromFile,
    Uniform,
    WeightedCascade,
    assign_probabilities,
    erdos_renyi,
    load_edge_list,
    preferential_attachment,
)
from containment.cascades import (
    CascadeSystem,
    PriorityProfile,
    induce_lower_priority,
    induce_upper_priority,
    make_priority_profile,
)
from containment.diffusion import (
    DiffusionOutcome,
    LiveEdgeGraph,
    evaluate_on_live_graph_fast,
    sample_live_edge_graph,
    simulate,
)
from containment.estimation import Estimate, EstimatorConfig, LiveGraphEnsemble, estimate, exact_f
from containment.solvers import (
    SolveResult,
    SpreadObjective,
    baseline_high_weight,
    baseline_proximity,
    baseline_random,
    brute_force_opt,
    greedy,
    sandwich,
)

__version__ = "0.1.0"
