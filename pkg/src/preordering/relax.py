"""LP upper bounds via lazily separated cutting planes.

The relaxation keeps every pair variable in [0, 1] and adds two families of
valid inequalities only when violated: the transitivity (triangle) rows
x_ij + x_jk - x_ik <= 1, and odd closed walk rows that bound the walk arcs
minus the chord arcs of an odd closed node walk by (k-1)/2.  Triangle
separation is exact enumeration; odd closed walks are separated exactly for
length 3 and heuristically for longer walks, with every candidate re-checked
exactly before it is emitted, so all bounds are valid even when the
heuristic misses cuts.

The solver is an in-repo dense two-phase primal simplex with Bland's rule
as an anti-cycling fallback.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Instance, pair_count, pair_index
from .exact import Mode

__all__ = [
    "CutRow",
    "LinearProgram",
    "LpSolution",
    "CutBound",
    "LpError",
    "solve_lp",
    "separate_triangles",
    "separate_odd_closed_walks",
    "cutting_plane_bound",
]

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-6


class LpError(RuntimeError):
    """Numerical failure inside the simplex (iteration cap exceeded)."""


@dataclass(frozen=True)
class CutRow:
    """A sparse valid inequality  sum coeffs[t] * x[indices[t]] <= rhs."""

    indices: tuple[int, ...]
    coeffs: tuple[float, ...]
    rhs: float
    kind: str
    key: tuple

    def violation(self, x: np.ndarray) -> float:
        return float(sum(c * x[i] for i, c in zip(self.indices, self.coeffs)) - self.rhs)


@dataclass
class LinearProgram:
    """Box-bounded LP over pair variables with a growing inequality pool."""

    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    rows: list[CutRow] = field(default_factory=list)
    _keys: set = field(default_factory=set)

    @classmethod
    def box(cls, objective: np.ndarray, fixed: dict[int, float] | None = None) -> "LinearProgram":
        objective = np.asarray(objective, dtype=float)
        nv = objective.size
        lower = np.zeros(nv)
        upper = np.ones(nv)
        for p, v in (fixed or {}).items():
            lower[p] = upper[p] = float(v)
        return cls(objective=objective, lower=lower, upper=upper)

    @property
    def num_vars(self) -> int:
        return self.objective.size

    def add_row(self, row: CutRow) -> bool:
        """Add a row unless an identical one is pooled; True if added."""
        if row.key in self._keys:
            return False
        self._keys.add(row.key)
        self.rows.append(row)
        return True


@dataclass(frozen=True)
class LpSolution:
    value: float
    x: np.ndarray
    iterations: int


@dataclass(frozen=True)
class CutBound:
    """Result of the cutting-plane loop; the bound is valid regardless of
    whether separation converged before the round cap."""

    upper_bound: float
    rounds: int
    x: np.ndarray
    converged: bool
    num_rows: int


# ---------------------------------------------------------------------------
# Dense two-phase primal simplex:  maximize c.y  s.t.  A y <= b, y >= 0.
# ---------------------------------------------------------------------------

def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    column = T[:, col].copy()
    column[row] = 0.0
    T -= np.outer(column, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


def _run_simplex(T: np.ndarray, basis: np.ndarray, allowed: np.ndarray,
                 pivot_tol: float, max_iter: int) -> int:
    """Pivot until no allowed column improves the (last-row) objective."""
    m = T.shape[0] - 1
    iterations = 0
    stalled = 0
    bland = False
    while True:
        reduced = np.where(allowed, T[-1, :-1], -np.inf)
        if bland:
            improving = np.flatnonzero(reduced > pivot_tol)
            if improving.size == 0:
                return iterations
            col = int(improving[0])
        else:
            col = int(np.argmax(reduced))
            if reduced[col] <= pivot_tol:
                return iterations
        column = T[:m, col]
        positive = column > pivot_tol
        if not positive.any():
            raise LpError("LP is unbounded; box rows are missing")
        ratios = np.where(positive, T[:m, -1] / np.where(positive, column, 1.0), np.inf)
        best = ratios.min()
        candidates = np.flatnonzero(ratios <= best + 1e-12)
        row = int(candidates[np.argmin(basis[candidates])])
        before = T[-1, -1]
        _pivot(T, basis, row, col)
        iterations += 1
        stalled = stalled + 1 if T[-1, -1] >= before - 1e-12 else 0
        if stalled > 50:
            bland = True
        if iterations > max_iter:
            raise LpError(f"simplex exceeded {max_iter} iterations")


def _simplex_max(c: np.ndarray, A: np.ndarray, b: np.ndarray,
                 pivot_tol: float = PIVOT_TOL) -> tuple[np.ndarray, int]:
    """Solve max c.y, A y <= b, y >= 0; returns (y, iterations)."""
    m, nv = A.shape
    negative = b < 0
    n_art = int(negative.sum())
    width = nv + m + n_art + 1
    T = np.zeros((m + 1, width))
    T[:m, :nv] = A
    T[np.arange(m), nv + np.arange(m)] = 1.0
    T[:m, -1] = b
    basis = nv + np.arange(m)
    art_cols = np.arange(nv + m, nv + m + n_art)
    if n_art:
        art_rows = np.flatnonzero(negative)
        T[art_rows] *= -1.0
        T[art_rows, art_cols] = 1.0
        basis[art_rows] = art_cols
        # phase 1: maximize minus the artificial sum
        T[-1, :] = 0.0
        T[-1, art_cols] = -1.0
        for r in art_rows:
            T[-1] += T[r]
        allowed = np.ones(width - 1, dtype=bool)
        iters1 = _run_simplex(T, basis, allowed, pivot_tol, 200 * (m + nv) + 5000)
        # the objective row stores the negated value: leftover artificial mass
        if T[-1, -1] > FEAS_TOL:
            raise LpError("LP is infeasible under the current fixings")
        # drive leftover artificials out of the basis or drop their rows
        for r in range(m):
            if basis[r] in art_cols:
                pivots = np.flatnonzero(np.abs(T[r, :nv + m]) > pivot_tol)
                if pivots.size:
                    _pivot(T, basis, r, int(pivots[0]))
                else:
                    T[r, :] = 0.0  # redundant row
    else:
        iters1 = 0
    T[-1, :] = 0.0
    T[-1, :nv] = c
    for r in range(m):
        col = basis[r]
        if T[-1, col] != 0.0:
            T[-1] -= T[-1, col] * T[r]
    allowed = np.ones(width - 1, dtype=bool)
    allowed[nv + m:] = False
    iters2 = _run_simplex(T, basis, allowed, pivot_tol, 200 * (m + nv) + 5000)
    y = np.zeros(nv)
    for r in range(m):
        if basis[r] < nv:
            y[basis[r]] = T[r, -1]
    return y, iters1 + iters2


def solve_lp(lp: LinearProgram, *, pivot_tol: float = PIVOT_TOL) -> LpSolution:
    """Optimal value and point of the pooled LP.

    Fixed variables (equal bounds) are substituted out; the remaining ones
    are shifted to start at zero, with their upper bounds folded in as rows.
    """
    lower, upper = lp.lower, lp.upper
    if (upper < lower).any():
        raise LpError("inconsistent variable bounds")
    free = np.flatnonzero(upper - lower > 0)
    position = {int(v): k for k, v in enumerate(free)}
    nf = free.size
    span = (upper - lower)[free]

    rows_a = []
    rows_b = []
    for row in lp.rows:
        a = np.zeros(nf)
        rhs = row.rhs
        for idx, coeff in zip(row.indices, row.coeffs):
            rhs -= coeff * lower[idx]
            k = position.get(idx)
            if k is not None:
                a[k] += coeff
        if nf and np.abs(a).any():
            rows_a.append(a)
            rows_b.append(rhs)
        elif rhs < -FEAS_TOL:
            raise LpError("LP is infeasible under the current fixings")
    if nf:
        A = np.vstack([np.eye(nf)] + rows_a)
        b = np.concatenate([span, np.array(rows_b)])
        y, iterations = _simplex_max(lp.objective[free], A, b, pivot_tol)
    else:
        y, iterations = np.zeros(0), 0
    x = lower.astype(float).copy()
    x[free] += y
    np.clip(x, lower, upper, out=x)
    return LpSolution(value=float(lp.objective @ x), x=x, iterations=iterations)


# ---------------------------------------------------------------------------
# Separation
# ---------------------------------------------------------------------------

def _pair_matrix(x: np.ndarray, n: int) -> np.ndarray:
    xm = np.zeros((n, n))
    for i in range(n):
        row = x[i * (n - 1):(i + 1) * (n - 1)]
        xm[i, :i] = row[:i]
        xm[i, i + 1:] = row[i:]
    return xm


def _triangle_row(i: int, j: int, k: int, n: int) -> CutRow:
    return CutRow(
        indices=(pair_index(i, j, n), pair_index(j, k, n), pair_index(i, k, n)),
        coeffs=(1.0, 1.0, -1.0),
        rhs=1.0,
        kind="triangle",
        key=("triangle", i, j, k),
    )


def separate_triangles(x: np.ndarray, n: int, *, tol: float = FEAS_TOL,
                       batch: int = 500) -> list[CutRow]:
    """All triangle rows violated by x, most violated first, capped."""
    xm = _pair_matrix(x, n)
    found = []
    for i in range(n):
        slab = xm[i][:, None] + xm - xm[i][None, :] - 1.0  # [j, k]
        slab[i, :] = -np.inf
        slab[:, i] = -np.inf
        np.fill_diagonal(slab, -np.inf)
        for j, k in np.argwhere(slab > tol):
            found.append((float(slab[j, k]), i, int(j), int(k)))
    found.sort(key=lambda t: (-t[0], t[1:]))
    return [_triangle_row(i, j, k, n) for _, i, j, k in found[:batch]]


def _walk_row(walk: tuple[int, ...], n: int) -> CutRow:
    k = len(walk)
    coeffs: dict[int, float] = {}
    for t in range(k):
        p = pair_index(walk[t], walk[(t + 1) % k], n)
        coeffs[p] = coeffs.get(p, 0.0) + 1.0
        q = pair_index(walk[t], walk[(t + 2) % k], n)
        coeffs[q] = coeffs.get(q, 0.0) - 1.0
    items = sorted((p, c) for p, c in coeffs.items() if c != 0.0)
    return CutRow(
        indices=tuple(p for p, _ in items),
        coeffs=tuple(c for _, c in items),
        rhs=(k - 1) / 2.0,
        kind="odd_closed_walk",
        key=("odd_closed_walk",) + walk,
    )


def _canonical_walk(walk: tuple[int, ...]) -> tuple[int, ...]:
    rotations = [walk[r:] + walk[:r] for r in range(len(walk))]
    return min(rotations)


def _walk_violation(walk: tuple[int, ...], xm: np.ndarray) -> float:
    k = len(walk)
    lhs = 0.0
    for t in range(k):
        lhs += xm[walk[t], walk[(t + 1) % k]] - xm[walk[t], walk[(t + 2) % k]]
    return lhs - (k - 1) / 2.0


def separate_odd_closed_walks(x: np.ndarray, n: int, max_k: int = 5, *,
                              tol: float = FEAS_TOL, batch: int = 500,
                              start_cap: int = 50) -> list[CutRow]:
    """Violated odd closed walk rows: exact for length 3, heuristic beyond.

    Walks longer than 3 come from shortest-closed-walk searches in the
    pair-state graph under the clamped step weight
    max(0, 1/2 - x[v, v'] + x[v, v'']); every candidate is re-evaluated
    exactly and emitted only if genuinely violated.
    """
    if max_k < 3 or max_k % 2 == 0:
        raise ValueError("max_k must be odd and at least 3")
    xm = _pair_matrix(x, n)
    results: dict[tuple[int, ...], float] = {}

    # length 3: enumerate all injective triples up to rotation
    for a in range(n):
        slab = (xm[a][:, None] - xm[a][None, :] + xm
                - xm[:, a][:, None] + xm[:, a][None, :] - xm.T - 1.0)
        slab[:a + 1, :] = -np.inf
        slab[:, :a + 1] = -np.inf
        np.fill_diagonal(slab, -np.inf)
        for b, c in np.argwhere(slab > tol):
            results[(a, int(b), int(c))] = float(slab[b, c])

    if max_k >= 5 and n >= 3:
        for walk in _heuristic_walks(xm, n, max_k, tol, start_cap):
            violation = _walk_violation(walk, xm)
            if violation > tol:
                key = _canonical_walk(walk)
                if violation > results.get(key, -np.inf):
                    results[key] = violation

    ordered = sorted(results.items(), key=lambda kv: (-kv[1], kv[0]))
    return [_walk_row(walk, n) for walk, _ in ordered[:batch]]


def _heuristic_walks(xm: np.ndarray, n: int, max_k: int, tol: float,
                     start_cap: int) -> list[tuple[int, ...]]:
    weight = np.maximum(0.0, 0.5 - xm[:, :, None] + xm[:, None, :])  # [a, b, c]
    idx = np.arange(n)
    weight[idx, idx, :] = np.inf           # invalid state (a, a)
    weight[:, idx, idx] = np.inf           # c == b
    weight[idx, :, idx] = np.inf           # c == a
    starts = [(float(xm[i, j]), i, j) for i in range(n) for j in range(n)
              if i != j and xm[i, j] > 0.5]
    starts.sort(key=lambda t: (-t[0], t[1], t[2]))
    walks = []
    for _, a0, b0 in starts[:start_cap]:
        dist = np.full((n, n), np.inf)
        dist[a0, b0] = 0.0
        parents = []
        for step in range(1, max_k + 1):
            stacked = dist[:, :, None] + weight
            parents.append(np.argmin(stacked, axis=0))
            dist = np.min(stacked, axis=0)
            if step >= 3 and step % 2 == 1 and dist[a0, b0] < 0.5 - tol:
                state = (a0, b0)
                nodes = [a0]
                for layer in range(step, 0, -1):
                    a = int(parents[layer - 1][state])
                    state = (a, state[0])
                    nodes.append(a)
                walks.append(tuple(nodes[:0:-1]))  # v_0 .. v_{k-1}
    return walks


# ---------------------------------------------------------------------------
# Cutting-plane loop
# ---------------------------------------------------------------------------

def _mode_rows(mode: Mode, n: int) -> list[CutRow]:
    rows = []
    for i in range(n):
        for j in range(i + 1, n):
            p, q = pair_index(i, j, n), pair_index(j, i, n)
            if mode is Mode.CLUSTERING:
                rows.append(CutRow((p, q), (1.0, -1.0), 0.0, "mode", ("sym+", i, j)))
                rows.append(CutRow((p, q), (-1.0, 1.0), 0.0, "mode", ("sym-", i, j)))
            elif mode is Mode.PARTIAL_ORDER:
                rows.append(CutRow((p, q), (1.0, 1.0), 1.0, "mode", ("asym", i, j)))
    return rows


def cutting_plane_bound(
    inst: Instance,
    use_ocw: bool = False,
    mode: Mode = Mode.PREORDER,
    *,
    max_walk_length: int = 5,
    tol: float = FEAS_TOL,
    batch: int = 500,
    max_rounds: int = 100,
    start_cap: int = 50,
    fixed: dict[tuple[int, int], int] | None = None,
) -> CutBound:
    """Upper bound on the mode optimum by lazily separated cutting planes.

    Each round solves the pooled LP, separates triangles and, once no
    triangle is violated and ``use_ocw`` is set, odd closed walks.  The
    returned bound is valid even if the round cap stops separation early.
    ``fixed`` pins pair variables (used by branch and bound).
    """
    n = inst.n
    objective = np.zeros(pair_count(n))
    for i in range(n):
        for j in range(n):
            if i != j:
                objective[pair_index(i, j, n)] = inst.values[i, j]
    fixed_idx = {pair_index(i, j, n): v for (i, j), v in (fixed or {}).items()}
    lp = LinearProgram.box(objective, fixed_idx)
    for row in _mode_rows(mode, n):
        lp.add_row(row)

    solution = solve_lp(lp)
    rounds = 0
    converged = False
    while rounds < max_rounds:
        cuts = separate_triangles(solution.x, n, tol=tol, batch=batch)
        if not cuts and use_ocw:
            cuts = separate_odd_closed_walks(
                solution.x, n, max_walk_length, tol=tol, batch=batch,
                start_cap=start_cap)
        if not cuts:
            converged = True
            break
        added = sum(lp.add_row(row) for row in cuts)
        if not added:
            break  # every violated row already pooled: numerical standstill
        solution = solve_lp(lp)
        rounds += 1
    return CutBound(
        upper_bound=solution.value,
        rounds=rounds,
        x=solution.x,
        converged=converged,
        num_rows=len(lp.rows),
    )
