"""Exact analysis of k-set agreement on round-based models defined by
required subgraphs: graph metrics, agreement bounds, protocol-complex
topology, and a ground-truth solvability oracle."""

from .bounds import (
    AuditError,
    AuditReport,
    BoundEntry,
    BoundsConsistencyError,
    BoundsReport,
    audit,
    bounds_report,
    lower_bound_multi,
    lower_bound_one_round,
    star_family_report,
    upper_bounds,
)
from .errors import BudgetExceeded
from .graphs import (
    Digraph,
    Model,
    complete_graph,
    cycle_graph,
    identity_graph,
    model_contains,
    path_product,
    product_reachability_search,
    product_set,
    star_graph,
    symmetric_closure,
    union_of_stars,
    upward_contains,
)
from .metrics import (
    CoveringSequence,
    MetricsReport,
    cov,
    covering_sequence,
    dom,
    edom,
    edom_over,
    m_coeff,
    max_cov,
    metrics_report,
)
from .solvability import (
    Scenario,
    SimulationReport,
    SolveResult,
    check_decision_map,
    decide_solvability,
    decision_map_from_json,
    decision_map_to_json,
    flat_view,
    scenario_graphs,
    scenarios,
    simulate_min_protocol,
)
from .topology import (
    Complex,
    ConnectivityVerdict,
    PseudosphereSpec,
    TransferReport,
    UnionOfPseudospheres,
    certify_connectivity,
    closed_above_spec,
    find_shelling_order,
    input_pseudosphere,
    interpret,
    intersect_pseudospheres,
    nerve,
    pseudosphere,
    reduced_homology_ranks,
    uninterpreted_complex,
    uninterpreted_simplex,
    verify_connectivity_transfer,
)

__version__ = "0.1.0"
