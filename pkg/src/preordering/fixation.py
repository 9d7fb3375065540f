"""Greedy arc fixation: fix one pair variable at a time by induced cost.

For an unfixed pair (i, j), two surrogate costs are kept:

* excluding the arc loses its own positive value plus, for every third node
  k, the smaller positive value of the chain i->k->j that exclusion breaks;
* inserting the arc forces chains through it, losing for every k the smaller
  of the conflicting values on k->i vs k->j and on j->k vs i->k.

Each step fixes the unfixed pair with the largest of the two costs, to the
side whose cost is smaller (ties exclude).  Fixed pairs get effective value
+inf or -inf, which makes later fixation decisions respect transitivity, so
the final 0/1 labelling is always a preorder.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from .core import Instance, Relation, RunReport, evaluate_objective, make_report, positive_part_bound

__all__ = ["FixationState", "induced_costs", "greedy_arc_fixation"]

_UNFIXED = -1


@dataclass
class FixationState:
    """Mutable state of one greedy-fixation run.

    ``effective`` holds the working values: +inf for pairs fixed to 1, -inf
    for pairs fixed to 0.  ``ice``/``ici`` cache the induced costs of the
    unfixed pairs; the priority queue holds (-key, i, j, stamp) entries with
    lazy invalidation via per-pair stamps.
    """

    effective: np.ndarray
    status: np.ndarray
    ice: np.ndarray
    ici: np.ndarray
    stamps: np.ndarray
    heap: list = field(default_factory=list)

    @classmethod
    def from_instance(cls, inst: Instance) -> "FixationState":
        n = inst.n
        state = cls(
            effective=inst.values.copy(),
            status=np.full((n, n), _UNFIXED, dtype=np.int8),
            ice=np.zeros((n, n)),
            ici=np.zeros((n, n)),
            stamps=np.zeros((n, n), dtype=np.int64),
        )
        np.fill_diagonal(state.status, 1)
        for i in range(n):
            state._refresh_row(i)
        state._push_all()
        return state

    @property
    def n(self) -> int:
        return self.status.shape[0]

    def unfixed_count(self) -> int:
        return int((self.status == _UNFIXED).sum())

    # -- induced-cost maintenance ------------------------------------------
    #
    # The batched formulas below skip the k = i and k = j exclusions: with a
    # zero diagonal (never fixed) those terms are min(0, .) clamped at 0.

    def _refresh_row(self, i: int) -> None:
        c = self.effective
        self.ice[i, :] = np.maximum(0.0, c[i, :]) + \
            np.maximum(0.0, np.minimum(c[i, :][:, None], c)).sum(axis=0)
        self.ici[i, :] = np.maximum(0.0, -c[i, :]) + \
            np.maximum(0.0, np.minimum(c[:, i][:, None], -c)).sum(axis=0) + \
            np.maximum(0.0, np.minimum(c.T, -c[i, :][:, None])).sum(axis=0)

    def _refresh_col(self, j: int) -> None:
        c = self.effective
        self.ice[:, j] = np.maximum(0.0, c[:, j]) + \
            np.maximum(0.0, np.minimum(c, c[:, j][None, :])).sum(axis=1)
        self.ici[:, j] = np.maximum(0.0, -c[:, j]) + \
            np.maximum(0.0, np.minimum(c.T, -c[:, j][None, :])).sum(axis=1) + \
            np.maximum(0.0, np.minimum(c[j, :][None, :], -c)).sum(axis=1)

    def _push_all(self) -> None:
        for i in range(self.n):
            for j in range(self.n):
                if self.status[i, j] == _UNFIXED:
                    self._push(i, j)

    def _push(self, i: int, j: int) -> None:
        key = max(self.ice[i, j], self.ici[i, j])
        heapq.heappush(self.heap, (-key, i, j, int(self.stamps[i, j])))

    def _pop_best(self) -> tuple[int, int, float]:
        while self.heap:
            neg_key, i, j, stamp = heapq.heappop(self.heap)
            if self.status[i, j] == _UNFIXED and stamp == self.stamps[i, j]:
                return i, j, -neg_key
        raise RuntimeError("priority queue exhausted with pairs still unfixed")

    def fix(self, i: int, j: int, value: int) -> None:
        """Fix pair (i, j) and refresh the costs of pairs incident to i or j."""
        if self.status[i, j] != _UNFIXED:
            raise ValueError(f"pair ({i}, {j}) is already fixed")
        self.status[i, j] = value
        self.effective[i, j] = np.inf if value else -np.inf
        self._refresh_row(i)
        self._refresh_row(j)
        self._refresh_col(i)
        self._refresh_col(j)
        incident = np.zeros((self.n, self.n), dtype=bool)
        incident[[i, j], :] = True
        incident[:, [i, j]] = True
        incident &= self.status == _UNFIXED
        self.stamps[incident] += 1
        for a, b in np.argwhere(incident):
            self._push(int(a), int(b))
        # keep stale entries from accumulating without bound
        live = self.unfixed_count()
        if len(self.heap) > 4 * live + 64:
            self.heap = []
            self._push_all()
            heapq.heapify(self.heap)


def induced_costs(state: FixationState, pair: tuple[int, int]) -> tuple[float, float]:
    """Induced costs (ice, ici) of an unfixed pair, straight from the
    defining sums over the current effective values."""
    i, j = pair
    if state.status[i, j] != _UNFIXED:
        raise ValueError(f"pair ({i}, {j}) is already fixed")
    c = state.effective
    mask = np.ones(state.n, dtype=bool)
    mask[[i, j]] = False
    ice = max(0.0, c[i, j]) + float(
        np.maximum(0.0, np.minimum(c[i, mask], c[mask, j])).sum())
    ici = max(0.0, -c[i, j]) + float(
        np.maximum(0.0, np.minimum(c[mask, i], -c[mask, j])).sum()
        + np.maximum(0.0, np.minimum(c[j, mask], -c[i, mask])).sum())
    return float(ice), float(ici)


def greedy_arc_fixation(inst: Instance, *, require_unique: bool = False) -> tuple[Relation, RunReport]:
    """Fix all pair variables greedily by maximal induced cost.

    Deterministic: key ties between pairs are broken by canonical pair
    order, and a pair with ice = ici is fixed to 0.  With ``require_unique``
    a ValueError is raised if any step's best fixation is not unique.
    """
    start = time.perf_counter()
    state = FixationState.from_instance(inst)
    trace = []
    for _ in range(inst.n * (inst.n - 1)):
        i, j, key = state._pop_best()
        if require_unique:
            unfixed = state.status == _UNFIXED
            if (np.maximum(state.ice, state.ici)[unfixed] == key).sum() != 1:
                raise ValueError(f"tie for best fixation at step {len(trace)}")
        bit = 1 if state.ice[i, j] > state.ici[i, j] else 0
        state.fix(i, j, bit)
        trace.append((i, j, bit))
    x = state.status == 1
    rel = Relation(x)
    report = make_report(
        objective=evaluate_objective(inst, rel),
        bound_B=positive_part_bound(inst),
        iterations=len(trace),
        wall_time=time.perf_counter() - start,
        trace=trace,
    )
    return rel, report
