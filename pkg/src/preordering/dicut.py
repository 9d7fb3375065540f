"""Greedy derandomized max-dicut and the resulting 4-approximation.

Random 0/1 node assignment cuts each arc with probability 1/4, so a quarter
of the total weight is achievable in expectation.  The greedy derandomization
assigns nodes one by one, keeping for every unassigned node the (scaled)
change in expected cut value of putting it on the tail side, and always
committing the node with the largest absolute change.  Applied to the
subgraph of positive-value arcs this yields a feasible preorder worth at
least B(c)/4, since a dicut contains no two consecutive arcs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .core import Instance, Relation, RunReport, evaluate_objective, make_report, positive_part_bound

__all__ = ["WeightedDigraph", "DicutResult", "greedy_max_dicut", "four_approx_preorder"]


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Arc-weighted digraph with nonnegative weights, no loops, no parallels."""

    n: int
    tails: np.ndarray
    heads: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tails, dtype=np.intp)
        h = np.asarray(self.heads, dtype=np.intp)
        w = np.asarray(self.weights, dtype=float)
        if not (t.shape == h.shape == w.shape) or t.ndim != 1:
            raise ValueError("tails, heads and weights must be 1-d arrays of equal length")
        if t.size and (t.min() < 0 or h.min() < 0 or t.max() >= self.n or h.max() >= self.n):
            raise ValueError("arc endpoint out of range")
        if (t == h).any():
            raise ValueError("self-loops are not allowed")
        if (w < 0).any():
            raise ValueError("arc weights must be nonnegative")
        if t.size:
            keys = t * self.n + h
            if np.unique(keys).size != keys.size:
                raise ValueError("duplicate arcs are not allowed")
        for name, a in (("tails", t), ("heads", h), ("weights", w)):
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @staticmethod
    def from_arcs(n: int, arcs) -> "WeightedDigraph":
        """Build from an iterable of (tail, head, weight) triples."""
        arcs = list(arcs)
        t = np.array([a[0] for a in arcs], dtype=np.intp)
        h = np.array([a[1] for a in arcs], dtype=np.intp)
        w = np.array([a[2] for a in arcs], dtype=float)
        return WeightedDigraph(n=n, tails=t, heads=h, weights=w)

    @staticmethod
    def positive_subgraph(inst: Instance) -> "WeightedDigraph":
        """All arcs with positive value, weighted by the value."""
        t, h = np.nonzero(inst.values > 0)
        return WeightedDigraph(n=inst.n, tails=t, heads=h, weights=inst.values[t, h])

    @property
    def num_arcs(self) -> int:
        return self.tails.size

    def total_weight(self) -> float:
        return float(self.weights.sum())

    def weight_matrix(self) -> np.ndarray:
        w = np.zeros((self.n, self.n))
        w[self.tails, self.heads] = self.weights
        return w


@dataclass(frozen=True)
class DicutResult:
    """A dicut delta(S) = arcs from S to its complement, with its weight."""

    S: frozenset[int]
    value: float
    total_weight: float


def greedy_max_dicut(g: WeightedDigraph, on_step=None) -> DicutResult:
    """Derandomized greedy max-dicut; the cut weighs at least a quarter of
    the total arc weight.

    Deterministic: argmax ties on |g_i| are broken by smallest node index,
    and a node with g_i = 0 goes to the tail side S.  The maintained g_i is
    four times the change in expected random-completion cut value of moving
    node i to the tail side.  ``on_step(in_s, in_sbar, unassigned, gain)``
    is called after every assignment (test instrumentation).
    """
    n = g.n
    w = g.weight_matrix()
    gain = w.sum(axis=1) - w.sum(axis=0)  # out-weight minus in-weight
    unassigned = np.ones(n, dtype=bool)
    in_s = np.zeros(n, dtype=bool)
    for _ in range(n):
        masked = np.where(unassigned, np.abs(gain), -np.inf)
        i = int(np.argmax(masked))  # first occurrence = smallest index
        unassigned[i] = False
        if gain[i] >= 0:
            in_s[i] = True
            gain[unassigned] -= w[i, unassigned] + w[unassigned, i]
        else:
            gain[unassigned] += w[i, unassigned] + w[unassigned, i]
        if on_step is not None:
            on_step(in_s.copy(), ~in_s & ~unassigned, unassigned.copy(), gain.copy())
    cut = np.outer(in_s, ~in_s)
    value = float(w[cut].sum())
    return DicutResult(S=frozenset(np.flatnonzero(in_s).tolist()), value=value,
                       total_weight=g.total_weight())


def four_approx_preorder(inst: Instance) -> tuple[Relation, RunReport]:
    """4-approximation: the greedy max-dicut of the positive-arc subgraph.

    The returned relation contains exactly the positive arcs crossing the
    cut; its objective is at least B(c)/4.
    """
    start = time.perf_counter()
    g = WeightedDigraph.positive_subgraph(inst)
    result = greedy_max_dicut(g)
    in_s = np.zeros(inst.n, dtype=bool)
    in_s[list(result.S)] = True
    x = np.outer(in_s, ~in_s) & (inst.values > 0)
    np.fill_diagonal(x, True)
    rel = Relation(x)
    objective = evaluate_objective(inst, rel)
    report = make_report(
        objective=objective,
        bound_B=positive_part_bound(inst),
        iterations=inst.n,
        wall_time=time.perf_counter() - start,
        trace=(("dicut", sorted(result.S), result.value),),
    )
    return rel, report
