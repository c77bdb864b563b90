"""Shapley network design games on undirected graphs, in exact arithmetic.

Exposes the game model (fair shares, potential, Nash checks), exact solvers
(Steiner optimum, full equilibrium enumeration, price of stability),
better-response dynamics, and the per-instance certificate that verifies the
single-sink price-of-stability bounding chain.
"""

from .certificate import (
    CertificateReport,
    CheckRecord,
    FrequencyProfile,
    bound_report,
    coverage_lower_bound_check,
    deviation_inequality_check,
    euler_order_bound_check,
    frequency_profile,
    pair_sharing_gain,
    potential_sandwich_check,
    run_certificate_pipeline,
)
from .dynamics import (
    BEST_IMPROVEMENT,
    FIRST_IMPROVEMENT,
    DynamicsStep,
    DynamicsTrace,
    TreeifyResult,
    better_response_step,
    dynamics_from_opt,
    run_dynamics,
    treeify,
)
from .errors import (
    CapacityError,
    ConnectivityError,
    InputError,
    InternalError,
    NetShapleyError,
    ParseError,
    PremiseError,
)
from .game import (
    GameInstance,
    NashCheck,
    NashWitness,
    StrategyProfile,
    best_response,
    deviation_cost,
    edge_loads,
    harmonic,
    is_nash,
    player_cost,
    potential,
    profile_from_vertex_lists,
    social_cost,
    validate_profile,
)
from .graphs import (
    Edge,
    Graph,
    Path,
    Tree,
    euler_first_appearance_order,
    is_tree,
    lca,
    minimum_spanning_tree,
    shortest_path,
    shortest_path_lengths,
    tree_path,
)
from .solvers import (
    EnumerationCaps,
    enumerate_nash,
    enumerate_simple_paths,
    min_potential_profile,
    opt_profile_from_tree,
    price_of_stability_exact,
    steiner_tree_brute_force,
    steiner_tree_exact,
    strategy_spaces,
)

__version__ = "0.1.0"
