"""Data model and basic operations for the maximum-value preordering problem.

An instance assigns a real value to every ordered pair of distinct nodes.
A solution is a preorder: a reflexive, transitive 0/1 relation.  Its value
is the sum of the values of the distinct ordered pairs it contains.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Instance",
    "Relation",
    "ClusteredOrder",
    "RunReport",
    "pair_count",
    "pair_index",
    "index_pair",
    "iter_pairs",
    "evaluate_objective",
    "positive_part_bound",
    "transitivity_interval",
    "verify_preorder",
    "transitive_closure",
    "decompose",
    "transitive_reduction",
    "dicut_cover",
    "complement_of_dicut_union",
    "make_report",
]


# ---------------------------------------------------------------------------
# Canonical pair indexing.
#
# Pair variables are indexed row-major over the n x n grid with the diagonal
# skipped.  This order is the tie-breaking order used everywhere (greedy
# selection, DFS branching, LP variables).
# ---------------------------------------------------------------------------

def pair_count(n: int) -> int:
    return n * (n - 1)


def pair_index(i: int, j: int, n: int) -> int:
    """Index of ordered pair (i, j), i != j, in canonical row-major order."""
    if i == j:
        raise ValueError("diagonal pairs have no index")
    return i * (n - 1) + (j - 1 if j > i else j)


def index_pair(p: int, n: int) -> tuple[int, int]:
    """Inverse of :func:`pair_index`."""
    i, r = divmod(p, n - 1)
    j = r + 1 if r >= i else r
    return i, j


def iter_pairs(n: int):
    """Yield all ordered pairs of distinct nodes in canonical order."""
    for i in range(n):
        for j in range(n):
            if i != j:
                yield i, j


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Instance:
    """A preordering instance: dense value matrix c with zero diagonal.

    ``values[i, j]`` is the value gained by relating i to j.  All entries
    must be finite and the diagonal must be exactly zero.
    """

    values: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"value matrix must be square, got shape {v.shape}")
        if v.shape[0] < 1:
            raise ValueError("instance needs at least one node")
        if not np.isfinite(v).all():
            raise ValueError("all values must be finite")
        if np.diagonal(v).any():
            raise ValueError("diagonal values must be zero")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != v.shape[0]:
                raise ValueError("label count does not match node count")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)


@dataclass(frozen=True, eq=False)
class Relation:
    """A reflexive 0/1 relation on n nodes, stored as a dense boolean matrix.

    Feasible solutions are the transitive ones; use :func:`verify_preorder`.
    """

    matrix: np.ndarray

    def __post_init__(self):
        x = np.array(self.matrix, dtype=bool)
        if x.ndim != 2 or x.shape[0] != x.shape[1]:
            raise ValueError(f"relation matrix must be square, got shape {x.shape}")
        if not np.diagonal(x).all():
            raise ValueError("relation must be reflexive (diagonal all ones)")
        x.flags.writeable = False
        object.__setattr__(self, "matrix", x)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def identity(n: int) -> "Relation":
        return Relation(np.eye(n, dtype=bool))

    @staticmethod
    def complete(n: int) -> "Relation":
        return Relation(np.ones((n, n), dtype=bool))

    @staticmethod
    def from_pairs(n: int, pairs) -> "Relation":
        x = np.eye(n, dtype=bool)
        for i, j in pairs:
            x[i, j] = True
        return Relation(x)

    def pairs(self) -> list[tuple[int, int]]:
        """Distinct ordered pairs contained in the relation, canonical order."""
        return [(i, j) for i, j in iter_pairs(self.n) if self.matrix[i, j]]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return self.n == other.n and bool((self.matrix == other.matrix).all())

    def __hash__(self) -> int:
        return hash((self.n, self.matrix.tobytes()))


@dataclass(frozen=True)
class ClusteredOrder:
    """A preorder in human-readable form: equivalence classes plus a strict
    partial order on the classes and its unique transitive reduction.

    ``classes`` are sorted by smallest member; ``dag`` and ``reduction``
    contain arcs between class positions in that list.
    """

    classes: tuple[tuple[int, ...], ...]
    dag: frozenset[tuple[int, int]]
    reduction: frozenset[tuple[int, int]]

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def to_relation(self) -> Relation:
        """Recompose the node-level relation (all intra-class pairs plus all
        dag pairs expanded to members)."""
        n = sum(len(c) for c in self.classes)
        x = np.eye(n, dtype=bool)
        for members in self.classes:
            idx = np.array(members)
            x[np.ix_(idx, idx)] = True
        for a, b in self.dag:
            x[np.ix_(np.array(self.classes[a]), np.array(self.classes[b]))] = True
        return Relation(x)


@dataclass
class RunReport:
    """Summary of one solver/heuristic run."""

    objective: float
    bound_B: float
    transitivity_lower: float
    transitivity_upper: float
    upper_bound: float | None = None
    iterations: int = 0
    wall_time: float = 0.0
    trace: tuple = field(default_factory=tuple)


def make_report(objective: float, bound_B: float, upper_bound: float | None = None,
                iterations: int = 0, wall_time: float = 0.0, trace=()) -> RunReport:
    """Build a RunReport with a consistent transitivity interval.

    Without an upper bound the interval upper end defaults to 1 (the bound B
    itself is always valid).
    """
    effective_upper = bound_B if upper_bound is None else upper_bound
    effective_upper = max(effective_upper, objective)
    lo, hi = transitivity_interval(max(objective, 0.0), max(effective_upper, 0.0), bound_B)
    return RunReport(
        objective=objective,
        bound_B=bound_B,
        transitivity_lower=lo,
        transitivity_upper=hi,
        upper_bound=upper_bound,
        iterations=iterations,
        wall_time=wall_time,
        trace=tuple(trace),
    )


# ---------------------------------------------------------------------------
# Objective and bounds
# ---------------------------------------------------------------------------

def evaluate_objective(inst: Instance, rel: Relation) -> float:
    """Sum of values over the distinct pairs contained in the relation.

    Works on arbitrary reflexive relations (feasibility not required), so it
    can score candidate relations as well.
    """
    if inst.n != rel.n:
        raise ValueError(f"instance has {inst.n} nodes but relation has {rel.n}")
    # the diagonal of c is zero, so reflexive pairs never contribute
    return float(inst.values[rel.matrix].sum())


def positive_part_bound(inst: Instance) -> float:
    """Upper bound B(c): sum of all positive values."""
    v = inst.values
    return float(v[v > 0].sum())


def transitivity_interval(objective_lb: float, upper_bound: float, B: float) -> tuple[float, float]:
    """Enclosing interval for the transitivity index (optimal value over B).

    Degenerate case B = 0: the empty positive part is trivially realizable,
    so the index is defined as 1.
    """
    if B < 0:
        raise ValueError("B must be nonnegative")
    if not 0 <= objective_lb <= upper_bound:
        raise ValueError("need 0 <= objective_lb <= upper_bound")
    if B == 0:
        return 1.0, 1.0
    return objective_lb / B, min(1.0, upper_bound / B)


# ---------------------------------------------------------------------------
# Preorder verification, closure, decomposition
# ---------------------------------------------------------------------------

def _compose(x: np.ndarray) -> np.ndarray:
    # boolean matrix product via BLAS; faster than numpy's bool matmul
    xf = x.astype(np.float64)
    return (xf @ xf) > 0.5


def verify_preorder(rel: Relation) -> bool:
    """True iff the relation is reflexive and transitive.

    Transitivity is the triangle condition x_ij + x_jk - x_ik <= 1 over all
    ordered triples of distinct nodes, equivalently closure under
    composition.
    """
    x = rel.matrix
    return not (_compose(x) & ~x).any()


def transitive_closure(rel: Relation) -> Relation:
    """Smallest transitive relation containing the input."""
    x = rel.matrix.copy()
    while True:
        y = x | _compose(x)
        if (y == x).all():
            return Relation(x)
        x = y


def decompose(rel: Relation) -> ClusteredOrder:
    """Split a preorder into equivalence classes and the class-level order.

    Two nodes share a class iff they are mutually related.  The class DAG
    has an arc where the relation is one-directional; its transitive
    reduction is computed as well.
    """
    if not verify_preorder(rel):
        raise ValueError("relation is not a preorder")
    x = rel.matrix
    n = rel.n
    sym = x & x.T
    rep = [int(np.flatnonzero(sym[i])[0]) for i in range(n)]  # min mutual partner
    reps = sorted(set(rep))
    pos = {r: k for k, r in enumerate(reps)}
    classes = tuple(tuple(i for i in range(n) if rep[i] == r) for r in reps)
    dag = frozenset(
        (pos[a], pos[b])
        for a in reps for b in reps
        if a != b and x[a, b] and not x[b, a]
    )
    return ClusteredOrder(classes=classes, dag=dag, reduction=transitive_reduction(dag))


def transitive_reduction(arcs, num_nodes: int | None = None) -> frozenset[tuple[int, int]]:
    """Unique minimal arc set whose transitive closure equals the input DAG.

    The input must be acyclic and transitively closed; an arc (a, b) is kept
    iff there is no c with (a, c) and (c, b).
    """
    arcs = set(arcs)
    if not arcs:
        return frozenset()
    if num_nodes is None:
        num_nodes = max(max(a, b) for a, b in arcs) + 1
    d = np.zeros((num_nodes, num_nodes), dtype=bool)
    for a, b in arcs:
        if a == b:
            raise ValueError("input contains a self-loop")
        d[a, b] = True
    if (d & d.T).any():
        raise ValueError("input contains a 2-cycle")
    two_step = _compose(d)
    if (two_step & ~d).any():
        raise ValueError("input is not transitively closed")
    return frozenset((a, b) for a, b in arcs if not two_step[a, b])


# ---------------------------------------------------------------------------
# Dicut-cover machinery: preorders are exactly the complements of unions of
# directed cuts.
# ---------------------------------------------------------------------------

def dicut_cover(rel: Relation) -> list[frozenset[int]]:
    """One node subset per node, S_i = {j : x_ij = 1}.

    For a preorder, the union of the dicuts delta(S_i) is exactly the set of
    distinct ordered pairs NOT in the relation.
    """
    if not verify_preorder(rel):
        raise ValueError("relation is not a preorder")
    x = rel.matrix
    return [frozenset(np.flatnonzero(x[i]).tolist()) for i in range(rel.n)]


def complement_of_dicut_union(n: int, subsets) -> Relation:
    """Relation containing every distinct pair not cut by any delta(S).

    Always yields a preorder, for arbitrary families of subsets.
    """
    x = np.ones((n, n), dtype=bool)
    for s in subsets:
        inside = np.zeros(n, dtype=bool)
        inside[list(s)] = True
        x &= ~np.outer(inside, ~inside)
    np.fill_diagonal(x, True)
    return Relation(x)
