"""Toolkit for the maximum-value preordering problem: approximation and
local-search heuristics, desk-scale exact solvers, and LP cutting-plane
upper bounds."""

from .core import (
    ClusteredOrder,
    Instance,
    Relation,
    RunReport,
    complement_of_dicut_union,
    decompose,
    dicut_cover,
    evaluate_objective,
    positive_part_bound,
    transitive_closure,
    transitive_reduction,
    transitivity_interval,
    verify_preorder,
)
from .dicut import DicutResult, WeightedDigraph, four_approx_preorder, greedy_max_dicut
from .exact import (
    Mode,
    SolverLimitError,
    branch_and_bound,
    brute_force_optimal,
    count_preorders,
    enumerate_preorders,
    successive_cluster_then_order,
)
from .fixation import FixationState, greedy_arc_fixation, induced_costs
from .insertion import gain_matrix, greedy_arc_insertion, insert_with_closure
from .moving import Move, apply_move, enumerate_moves, greedy_moving
from .relax import (
    CutBound,
    CutRow,
    LinearProgram,
    cutting_plane_bound,
    separate_odd_closed_walks,
    separate_triangles,
    solve_lp,
)

__version__ = "0.1.0"

__all__ = [
    "ClusteredOrder", "Instance", "Relation", "RunReport",
    "complement_of_dicut_union", "decompose", "dicut_cover",
    "evaluate_objective", "positive_part_bound", "transitive_closure",
    "transitive_reduction", "transitivity_interval", "verify_preorder",
    "DicutResult", "WeightedDigraph", "four_approx_preorder", "greedy_max_dicut",
    "Mode", "SolverLimitError", "branch_and_bound", "brute_force_optimal",
    "count_preorders", "enumerate_preorders", "successive_cluster_then_order",
    "FixationState", "greedy_arc_fixation", "induced_costs",
    "gain_matrix", "greedy_arc_insertion", "insert_with_closure",
    "Move", "apply_move", "enumerate_moves", "greedy_moving",
    "CutBound", "CutRow", "LinearProgram", "cutting_plane_bound",
    "separate_odd_closed_walks", "separate_triangles", "solve_lp",
]
