"""Exact decision, fiber enumeration and oracle checks for tropical mixtures of star trees."""

from .errors import (
    BadIndices,
    BudgetExceeded,
    InvalidTree,
    LengthMismatch,
    NegativeEntry,
    NotAPartition,
    NotInImage,
    NotTreeMetric,
    OutOfDomain,
    PostconditionViolation,
    SizeMismatch,
    StarInput,
    StarTreeMixError,
    TooFewTaxa,
    WrongSplit,
)
from .linear import Constraint, LinearSystem, solve_linear
from .metric import (
    DissimilarityMap,
    QuartetPairing,
    four_point_violation,
    from_matrix,
    is_metric,
    is_star_metric,
    is_tree_metric,
    make_dissimilarity,
    quartet_pairing,
    restrict,
    tropical_mix,
)
from .mixture import (
    CaseFamily,
    MixtureDecision,
    Offsets,
    decide_two_star_mixture,
    enumerate_fiber_cases,
    offsets_from_stars,
    quartet_is_12_34,
    sample_decomposition,
    verify_decomposition,
)
from .oracle import (
    Feasibility,
    PointConfiguration,
    RankSearch,
    cut_obstruction,
    delta2n_points,
    k_star_feasible,
    secant_membership,
    star_rank_bounds,
)
from .trees import (
    DoubleStar,
    StarTree,
    TopologyClass,
    WeightedTree,
    classify_topology,
    cut_metric,
    double_star,
    double_star_metric,
    quartet_edge_weights,
    reconstruct_tree,
    star,
    star_metric,
    tree_metric,
)

__version__ = "0.1.0"
