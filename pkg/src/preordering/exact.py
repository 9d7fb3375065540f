"""Desk-scale exact solvers: DFS with implication propagation, an LP-guided
branch and bound, preorder enumeration, and the successive
cluster-then-order pipeline.

The search assigns pair variables in canonical order.  Setting a pair to 1
forces all transitive consequences; setting it to 0 forbids every chain
through it.  Both cascades are propagated eagerly over bitmask rows, so
every leaf is a preorder and contradictions prune early.  The optimistic
bound adds all undecided positive values to the current value.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass

import numpy as np

from .core import (
    Instance,
    Relation,
    evaluate_objective,
    iter_pairs,
    pair_index,
    verify_preorder,
)
from .dicut import four_approx_preorder

__all__ = [
    "Mode",
    "SolverLimitError",
    "brute_force_optimal",
    "branch_and_bound",
    "count_preorders",
    "enumerate_preorders",
    "successive_cluster_then_order",
    "DEFAULT_LIMITS",
]


class Mode(enum.Enum):
    """Problem variant: plain preorders, symmetric ones (clusterings), or
    antisymmetric ones (partial orders)."""

    PREORDER = "preorder"
    CLUSTERING = "clustering"
    PARTIAL_ORDER = "partial_order"

    @classmethod
    def from_string(cls, s: str) -> "Mode":
        return cls(s.replace("-", "_"))


class SolverLimitError(RuntimeError):
    """Instance exceeds the configured size limit of an exact solver."""


DEFAULT_LIMITS = {Mode.PREORDER: 7, Mode.CLUSTERING: 9, Mode.PARTIAL_ORDER: 8}


class _SearchState:
    """Partial 0/1 assignment over pairs with transitivity propagation.

    Rows and columns are Python-int bitmasks; the trail records every set
    pair so branches can be undone in O(1) per set pair.
    """

    def __init__(self, n: int, values: np.ndarray | None, mode: Mode):
        self.n = n
        self.mode = mode
        # plain nested lists: scalar access dominates the search runtime
        self.values = values.tolist() if values is not None else None
        self.one_rows = [1 << i for i in range(n)]
        self.zero_rows = [0] * n
        self.one_cols = [1 << i for i in range(n)]
        self.zero_cols = [0] * n
        self.trail: list[tuple[int, int, int]] = []
        self.current = 0.0
        if values is not None:
            self.positive = np.maximum(values, 0.0).tolist()
            self.remaining_positive = float(np.maximum(values, 0.0).sum())
        else:
            self.positive = None
            self.remaining_positive = 0.0

    def decided(self, i: int, j: int) -> bool:
        return bool((self.one_rows[i] | self.zero_rows[i]) >> j & 1)

    def value_of(self, i: int, j: int) -> int:
        return self.one_rows[i] >> j & 1

    def bound(self) -> float:
        return self.current + self.remaining_positive

    def assign(self, i: int, j: int, v: int) -> bool:
        """Set pair (i, j) to v and propagate; False on contradiction.

        The trail grows by every pair actually set, whether or not the
        propagation ultimately succeeds; call :meth:`undo` either way.
        """
        stack = [(i, j, v)]
        while stack:
            a, b, w = stack.pop()
            if self.one_rows[a] >> b & 1:
                if w == 1:
                    continue
                return False
            if self.zero_rows[a] >> b & 1:
                if w == 0:
                    continue
                return False
            bit = 1 << b
            if w:
                self.one_rows[a] |= bit
                self.one_cols[b] |= 1 << a
            else:
                self.zero_rows[a] |= bit
                self.zero_cols[b] |= 1 << a
            self.trail.append((a, b, w))
            if self.values is not None:
                self.remaining_positive -= self.positive[a][b]
                if w:
                    self.current += self.values[a][b]
            if self.mode is Mode.CLUSTERING:
                stack.append((b, a, w))
            elif self.mode is Mode.PARTIAL_ORDER and w:
                stack.append((b, a, 0))
            if w:
                # k->a forces k->b; b->k forces a->k
                pending = self.one_cols[a] & ~self.one_cols[b]
                while pending:
                    low = pending & -pending
                    pending ^= low
                    stack.append((low.bit_length() - 1, b, 1))
                pending = self.one_rows[b] & ~self.one_rows[a]
                while pending:
                    low = pending & -pending
                    pending ^= low
                    stack.append((a, low.bit_length() - 1, 1))
            else:
                # chains a->k->b are now impossible
                pending = self.one_rows[a] & ~self.zero_cols[b]
                while pending:
                    low = pending & -pending
                    pending ^= low
                    stack.append((low.bit_length() - 1, b, 0))
                pending = self.one_cols[b] & ~self.zero_rows[a]
                while pending:
                    low = pending & -pending
                    pending ^= low
                    stack.append((a, low.bit_length() - 1, 0))
        return True

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            a, b, w = self.trail.pop()
            if w:
                self.one_rows[a] &= ~(1 << b)
                self.one_cols[b] &= ~(1 << a)
            else:
                self.zero_rows[a] &= ~(1 << b)
                self.zero_cols[b] &= ~(1 << a)
            if self.values is not None:
                self.remaining_positive += self.positive[a][b]
                if w:
                    self.current -= self.values[a][b]

    def snapshot(self) -> Relation:
        x = np.zeros((self.n, self.n), dtype=bool)
        for i, row in enumerate(self.one_rows):
            for j in range(self.n):
                x[i, j] = bool(row >> j & 1)
        return Relation(x)

    def fixed_pairs(self) -> dict[tuple[int, int], int]:
        return {
            (i, j): self.value_of(i, j)
            for i, j in iter_pairs(self.n)
            if self.decided(i, j)
        }


def _mode_feasible(rel: Relation, mode: Mode) -> bool:
    x = rel.matrix
    if mode is Mode.CLUSTERING:
        return bool((x == x.T).all())
    if mode is Mode.PARTIAL_ORDER:
        off = x & x.T
        return not (off & ~np.eye(rel.n, dtype=bool)).any()
    return True


def _check_limit(n: int, mode: Mode, limit: int | None) -> None:
    cap = DEFAULT_LIMITS[mode] if limit is None else limit
    if n > cap:
        raise SolverLimitError(
            f"{n} nodes exceeds the limit of {cap} for exact {mode.value} solving")


def brute_force_optimal(
    inst: Instance,
    mode: Mode = Mode.PREORDER,
    *,
    limit: int | None = None,
    warm: tuple[float, Relation] | None = None,
) -> tuple[float, Relation]:
    """Globally optimal value and one optimal relation.

    Depth-first over pairs in canonical order, trying 1 before 0, with
    transitivity propagation and remaining-positive-value pruning.  Without
    a warm start the returned relation is the first optimum encountered in
    that order (the identity if nothing beats value 0).  A warm start
    ``(value, relation)`` prunes harder but may change which optimal
    relation is returned, never the value.
    """
    _check_limit(inst.n, mode, limit)
    n = inst.n
    state = _SearchState(n, inst.values, mode)
    pairs = [(i, j) for i, j in iter_pairs(n)]
    best_val = 0.0
    best_rel = Relation.identity(n)
    if warm is not None and warm[0] > 0:
        best_val, best_rel = warm

    def search(idx: int) -> None:
        nonlocal best_val, best_rel
        while idx < len(pairs) and state.decided(*pairs[idx]):
            idx += 1
        if idx == len(pairs):
            if state.current > best_val:
                best_val = state.current
                best_rel = state.snapshot()
            return
        i, j = pairs[idx]
        for v in (1, 0):
            mark = len(state.trail)
            if state.assign(i, j, v) and state.bound() > best_val:
                search(idx + 1)
            state.undo(mark)

    search(0)
    # canonical value: one summation path, consistent with the relation
    return evaluate_objective(inst, best_rel), best_rel


def enumerate_preorders(n: int, mode: Mode = Mode.PREORDER, *, limit: int = 6):
    """Yield every feasible relation on n nodes for the given mode."""
    if n > limit:
        raise SolverLimitError(f"{n} nodes exceeds the enumeration limit of {limit}")
    state = _SearchState(n, None, mode)
    pairs = [(i, j) for i, j in iter_pairs(n)]

    def walk(idx: int):
        while idx < len(pairs) and state.decided(*pairs[idx]):
            idx += 1
        if idx == len(pairs):
            yield state.snapshot()
            return
        i, j = pairs[idx]
        for v in (1, 0):
            mark = len(state.trail)
            if state.assign(i, j, v):
                yield from walk(idx + 1)
            state.undo(mark)

    yield from walk(0)


def count_preorders(n: int, *, limit: int = 6) -> int:
    """Number of distinct preorders (reflexive transitive relations) on n
    labeled nodes, by exhaustive propagation search."""
    if n > limit:
        raise SolverLimitError(f"{n} nodes exceeds the counting limit of {limit}")
    state = _SearchState(n, None, Mode.PREORDER)
    pairs = [(i, j) for i, j in iter_pairs(n)]

    def walk(idx: int) -> int:
        while idx < len(pairs) and state.decided(*pairs[idx]):
            idx += 1
        if idx == len(pairs):
            return 1
        total = 0
        i, j = pairs[idx]
        for v in (1, 0):
            mark = len(state.trail)
            if state.assign(i, j, v):
                total += walk(idx + 1)
            state.undo(mark)
        return total

    return walk(0)


def branch_and_bound(
    inst: Instance,
    mode: Mode = Mode.PREORDER,
    bound_provider=None,
    *,
    limit: int | None = 15,
    integrality_tol: float = 1e-6,
    prune_slack: float = 1e-9,
) -> tuple[float, Relation]:
    """Exact search guided by LP upper bounds.

    ``bound_provider(inst, mode, fixed)`` must return ``(upper_bound, x)``
    where x is the fractional LP point as a pair-indexed vector (or None).
    The default provider runs the triangle cutting-plane loop with the
    branching decisions fixed into the variable bounds.  Branches on the
    most fractional pair, ties by canonical order; the optimal value always
    matches :func:`brute_force_optimal`.
    """
    if limit is not None and inst.n > limit:
        raise SolverLimitError(f"{inst.n} nodes exceeds the branch-and-bound limit of {limit}")
    if bound_provider is None:
        from . import relax

        def bound_provider(instance, search_mode, fixed):
            result = relax.cutting_plane_bound(
                instance, use_ocw=False, mode=search_mode, fixed=fixed)
            return result.upper_bound, result.x

    n = inst.n
    state = _SearchState(n, inst.values, mode)
    pairs = [(i, j) for i, j in iter_pairs(n)]
    best_val = 0.0
    best_rel = Relation.identity(n)
    if mode in (Mode.PREORDER, Mode.PARTIAL_ORDER):
        rel, report = four_approx_preorder(inst)
        if report.objective > 0:
            best_val, best_rel = report.objective, rel

    def integral_candidate(x: np.ndarray) -> Relation | None:
        rounded = np.abs(x - np.round(x))
        if (rounded > integrality_tol).any():
            return None
        m = np.eye(n, dtype=bool)
        for i, j in iter_pairs(n):
            m[i, j] = x[pair_index(i, j, n)] > 0.5
        return Relation(m)

    def search() -> None:
        nonlocal best_val, best_rel
        upper, x = bound_provider(inst, mode, state.fixed_pairs())
        if upper <= best_val + prune_slack:
            return
        branch_pair = None
        if x is not None:
            candidate = integral_candidate(x)
            if candidate is not None:
                if verify_preorder(candidate) and _mode_feasible(candidate, mode):
                    value = evaluate_objective(inst, candidate)
                    if value > best_val:
                        best_val, best_rel = value, candidate
                    return
            fractionality = np.minimum(x, 1.0 - x)
            order = -1.0
            for p, (i, j) in enumerate(pairs):
                if not state.decided(i, j) and fractionality[p] > order:
                    order = fractionality[p]
                    branch_pair = (i, j)
        if branch_pair is None:
            branch_pair = next(
                ((i, j) for i, j in pairs if not state.decided(i, j)), None)
        if branch_pair is None:
            if state.current > best_val:
                best_val = state.current
                best_rel = state.snapshot()
            return
        i, j = branch_pair
        for v in (1, 0):
            mark = len(state.trail)
            if state.assign(i, j, v) and state.bound() > best_val:
                search()
            state.undo(mark)

    search()
    return evaluate_objective(inst, best_rel), best_rel


def successive_cluster_then_order(
    inst: Instance,
    *,
    solver=None,
    cluster_limit: int | None = None,
    order_limit: int | None = None,
) -> tuple[float, Relation]:
    """Solve clustering first, then partially order the obtained clusters.

    Stage 2 works on the cluster-level instance whose value for a class
    pair (A, B) is the sum of all node values from A to B, which makes the
    stage-2 objective equal the node-level gain exactly.  The combined
    value never exceeds the preorder optimum.
    """
    from .core import decompose

    if solver is None:
        def solver(instance, mode, limit):
            return brute_force_optimal(instance, mode, limit=limit)

    _, clustering = solver(inst, Mode.CLUSTERING, cluster_limit)
    clustered = decompose(clustering)
    m = clustered.num_classes
    cluster_values = np.zeros((m, m))
    for a in range(m):
        for b in range(m):
            if a != b:
                idx_a = np.array(clustered.classes[a])
                idx_b = np.array(clustered.classes[b])
                cluster_values[a, b] = inst.values[np.ix_(idx_a, idx_b)].sum()
    _, order = solver(Instance(cluster_values), Mode.PARTIAL_ORDER, order_limit)

    x = clustering.matrix.copy()
    for a in range(m):
        for b in range(m):
            if a != b and order.matrix[a, b]:
                x[np.ix_(np.array(clustered.classes[a]),
                         np.array(clustered.classes[b]))] = True
    combined = Relation(x)
    return evaluate_objective(inst, combined), combined
