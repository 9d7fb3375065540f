"""Acceptance suite: every criterion at its stated tolerance, one printed
pass line per criterion (run with ``pytest -s`` to see them)."""

import itertools
import time

import numpy as np
import pytest

from preordering import (
    Instance,
    Mode,
    Relation,
    branch_and_bound,
    brute_force_optimal,
    complement_of_dicut_union,
    count_preorders,
    cutting_plane_bound,
    dicut_cover,
    enumerate_preorders,
    evaluate_objective,
    four_approx_preorder,
    gain_matrix,
    greedy_arc_fixation,
    greedy_arc_insertion,
    greedy_moving,
    insert_with_closure,
    positive_part_bound,
    separate_odd_closed_walks,
    separate_triangles,
    successive_cluster_then_order,
    transitivity_interval,
    verify_preorder,
)
from preordering.core import pair_count, pair_index
from preordering.moving import apply_move, enumerate_moves

import oracles
from conftest import (
    ADVERSARIAL_FIXATIONS,
    adversarial_instance,
    worked_example_instance,
    chorded_cycle_instance,
    tie_prone_instance,
    random_fractional_point,
    random_instance,
    random_preorder,
)


def report(criterion, text):
    print(f"ACCEPTANCE {criterion} PASS - {text}")


@pytest.fixture(scope="module")
def preorders_by_n():
    return {n: list(enumerate_preorders(n)) for n in range(1, 6)}


def relation_vector(rel):
    n = rel.n
    v = np.zeros(pair_count(n))
    for i in range(n):
        for j in range(n):
            if i != j and rel.matrix[i, j]:
                v[pair_index(i, j, n)] = 1.0
    return v


def test_criterion_01_fig2_exact_and_index():
    start = time.perf_counter()
    inst = worked_example_instance()
    value, rel = brute_force_optimal(inst)
    elapsed = time.perf_counter() - start
    B = positive_part_bound(inst)
    assert value == 14.0
    assert B == 17.0
    lo, hi = transitivity_interval(value, value, B)
    assert lo == hi == 14.0 / 17.0
    assert verify_preorder(rel)
    assert elapsed < 1.0
    report(1, f"worked_example exact 14, B 17, T {lo:.6f} exact, {elapsed * 1000:.0f} ms")


def test_criterion_02_fig3_exact_and_lp_bounds():
    start = time.perf_counter()
    inst = chorded_cycle_instance()
    value, _ = brute_force_optimal(inst)
    B = positive_part_bound(inst)
    assert value == 1.0
    assert B == 3.0
    lo, hi = transitivity_interval(value, value, B)
    assert lo == hi == 1.0 / 3.0
    triangle = cutting_plane_bound(inst)
    assert abs(triangle.upper_bound - 1.5) <= 1e-6
    ocw = cutting_plane_bound(inst, use_ocw=True)
    assert abs(ocw.upper_bound - 1.0) <= 1e-6
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    report(2, f"chorded_cycle exact 1, B 3, T 1/3, LP {triangle.upper_bound:.6f}, "
              f"OCW {ocw.upper_bound:.6f}, {elapsed * 1000:.0f} ms")


def test_criterion_03_appendix_c_trace():
    start = time.perf_counter()
    inst = adversarial_instance()
    optimum, _ = brute_force_optimal(inst)
    rel, rep = greedy_arc_fixation(inst, require_unique=True)
    elapsed = time.perf_counter() - start
    assert optimum == 50130.0
    assert rep.objective == 10280.0
    assert list(rep.trace) == ADVERSARIAL_FIXATIONS
    assert verify_preorder(rel)
    assert optimum / rep.objective > 4.0
    assert elapsed < 1.0
    report(3, f"appendix-C exact 50130, greedy fixation 10280, 30-step trace "
              f"verbatim, ratio {optimum / rep.objective:.3f} > 4, {elapsed * 1000:.0f} ms")


def test_criterion_04_fig4_exact_and_fixation():
    inst = tie_prone_instance()
    value, _ = brute_force_optimal(inst)
    assert value == 4.0
    rel, rep = greedy_arc_fixation(inst)
    assert verify_preorder(rel)
    assert rep.objective <= 4.0
    report(4, f"tie_prone exact 4, fixation feasible at {rep.objective} <= 4 "
              "(tie-dependent outcome)")


def test_criterion_05_four_approximation_guarantee():
    rng = np.random.default_rng(50_001)
    violations = 0
    for trial in range(500):
        n = 3 + trial % 5
        inst = random_instance(rng, n)
        _, rep = four_approx_preorder(inst)
        B = positive_part_bound(inst)
        if n <= 5:
            optimum, _ = brute_force_optimal(inst)
        else:
            optimum, _ = branch_and_bound(inst)
        if rep.objective < B / 4.0 - 1e-9 or rep.objective < optimum / 4.0 - 1e-9:
            violations += 1
    assert violations == 0
    report(5, "500 random instances n in 3..7: dicut objective >= B/4 and "
              ">= optimum/4, zero violations")


def test_criterion_06_oracle_equivalence():
    # brute force vs branch and bound: exhaustive over sign instances
    checked = 0
    for n in (2, 3):
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        for signs in itertools.product((-1.0, 1.0), repeat=len(pairs)):
            v = np.zeros((n, n))
            for (i, j), s in zip(pairs, signs):
                v[i, j] = s
            inst = Instance(v)
            assert brute_force_optimal(inst)[0] == branch_and_bound(inst)[0]
            checked += 1
    rng = np.random.default_rng(60_001)
    n4_pairs = [(i, j) for i in range(4) for j in range(4) if i != j]
    for signs in itertools.product((-1.0, 1.0), repeat=len(n4_pairs)):
        v = np.zeros((4, 4))
        for (i, j), s in zip(n4_pairs, signs):
            v[i, j] = s
        inst = Instance(v)
        assert brute_force_optimal(inst)[0] == branch_and_bound(inst)[0]
        checked += 1
    for trial in range(200):
        inst = random_instance(rng, 5 + trial % 2, integer=True, low=-7, high=7)
        assert brute_force_optimal(inst)[0] == branch_and_bound(inst)[0]
        checked += 1

    # gain matrix vs insert-and-evaluate on every reachable insertion state
    states = 0
    for trial in range(25):
        n = int(rng.integers(3, 7))
        inst = random_instance(rng, n)
        rel = random_preorder(rng, n) if trial % 2 else Relation.identity(n)
        while True:
            g = gain_matrix(inst, rel)
            for i in range(n):
                for j in range(n):
                    if i != j and not rel.matrix[i, j]:
                        expected = oracles.insertion_gain_by_reclosure(
                            inst.values.tolist(), rel.matrix, i, j)
                        assert g[i, j] == pytest.approx(expected, abs=1e-9)
            states += 1
            g[rel.matrix] = -np.inf
            p = int(np.argmax(g))
            if g.flat[p] <= 0:
                break
            rel = insert_with_closure(rel, divmod(p, n))

    # move deltas vs apply-and-evaluate
    deltas = 0
    for trial in range(60):
        n = int(rng.integers(2, 7))
        inst = random_instance(rng, n)
        rel = random_preorder(rng, n)
        base = evaluate_objective(inst, rel)
        for move in enumerate_moves(inst, rel):
            realized = evaluate_objective(inst, apply_move(rel, move)) - base
            assert move.delta == pytest.approx(realized, abs=1e-9)
            deltas += 1
    report(6, f"brute force == branch-and-bound on {checked} instances "
              f"(sign-exhaustive n<=4 + 200 random n=5,6); gains exact on "
              f"{states} insertion states; {deltas} move deltas exact")


def test_criterion_07_enumerator_counts():
    expected = {1: 1, 2: 4, 3: 29, 4: 355}
    for n, count in expected.items():
        assert count_preorders(n) == count
    for n in (1, 2, 3, 4):
        filtered = sum(1 for _ in oracles.all_preorders_by_filter(n))
        assert filtered == expected[n]
    report(7, "count_preorders(1..4) = 1, 4, 29, 355, matching the "
              "2^(n(n-1)) filter oracle")


def test_criterion_08_cut_validity_and_bound_sandwich(preorders_by_n):
    rng = np.random.default_rng(80_001)
    rows_checked = 0
    for n in (3, 4, 5):
        vectors = np.array([relation_vector(r) for r in preorders_by_n[n]])
        points = [random_fractional_point(rng, n) for _ in range(25)]
        for trial in range(6):
            inst = random_instance(rng, n)
            points.append(cutting_plane_bound(inst).x)
            points.append(cutting_plane_bound(inst, use_ocw=True,
                                              max_walk_length=7).x)
        for x in points:
            rows = separate_triangles(x, n, batch=10**9)
            rows += separate_odd_closed_walks(x, n, 7, batch=10**9)
            for row in rows:
                lhs = vectors[:, list(row.indices)] @ np.array(row.coeffs)
                assert (lhs <= row.rhs + 1e-9).all(), row
                rows_checked += 1
    assert rows_checked > 0

    sandwiches = 0
    for _ in range(20):
        n = int(rng.integers(3, 6))
        inst = random_instance(rng, n)
        optimum, _ = brute_force_optimal(inst)
        ocw = cutting_plane_bound(inst, use_ocw=True).upper_bound
        triangle = cutting_plane_bound(inst).upper_bound
        B = positive_part_bound(inst)
        assert optimum <= ocw + 1e-6
        assert ocw <= triangle + 1e-6
        assert triangle <= B + 1e-6
        sandwiches += 1
    total = sum(len(v) for v in preorders_by_n.values())
    report(8, f"{rows_checked} generated rows valid on all preorders up to "
              f"n=5 ({total} relations incl. 6942 at n=5); bound sandwich "
              f"held on {sandwiches} instances")


def test_criterion_09_dicut_cover_roundtrip(preorders_by_n):
    covered = 0
    for n, relations in preorders_by_n.items():
        off_diagonal = ~np.eye(n, dtype=bool)
        for rel in relations:
            cut = np.zeros((n, n), dtype=bool)
            for s in dicut_cover(rel):
                inside = np.zeros(n, dtype=bool)
                inside[list(s)] = True
                cut |= np.outer(inside, ~inside)
            assert (cut == (~rel.matrix & off_diagonal)).all()
            covered += 1
    rng = np.random.default_rng(90_001)
    families = 0
    for _ in range(200):
        n = int(rng.integers(2, 8))
        subsets = [
            frozenset(int(v) for v in rng.choice(n, size=rng.integers(0, n + 1),
                                                 replace=False))
            for _ in range(rng.integers(0, n + 3))
        ]
        assert verify_preorder(complement_of_dicut_union(n, subsets))
        families += 1
    report(9, f"dicut-cover complement equality on {covered} preorders "
              f"(all n <= 5); complements of {families} random dicut-union "
              "families all feasible")


def test_criterion_10_variant_ordering():
    rng = np.random.default_rng(100_001)
    for trial in range(60):
        n = 3 + trial % 4
        inst = random_instance(rng, n, integer=trial % 2 == 0, low=-5, high=5)
        preorder_value, _ = brute_force_optimal(inst, Mode.PREORDER)
        clustering_value, _ = brute_force_optimal(inst, Mode.CLUSTERING)
        partial_value, _ = brute_force_optimal(inst, Mode.PARTIAL_ORDER)
        successive_value, _ = successive_cluster_then_order(inst)
        assert clustering_value <= successive_value + 1e-9
        assert successive_value <= preorder_value + 1e-9
        assert partial_value <= preorder_value + 1e-9
    report(10, "clustering <= successive <= preorder and partial-order <= "
               "preorder on 60 random instances n in 3..6")


def test_criterion_11_heuristic_feasibility_and_ascent():
    rng = np.random.default_rng(110_001)
    for trial in range(500):
        n = 3 + trial % 6
        inst = random_instance(rng, n)
        fixation_rel, _ = greedy_arc_fixation(inst)
        assert verify_preorder(fixation_rel)
        insertion_rel, insertion_rep = greedy_arc_insertion(inst)
        assert verify_preorder(insertion_rel)
        climbed = [entry[3] for entry in insertion_rep.trace]
        assert all(b > a for a, b in zip([0.0] + climbed, climbed))
        moving_rel, moving_rep = greedy_moving(inst)
        assert verify_preorder(moving_rel)
        climbed = [entry[3] for entry in moving_rep.trace]
        assert all(b > a for a, b in zip([0.0] + climbed, climbed))
    report(11, "500 random instances n in 3..8: fixation/insertion/moving "
               "outputs feasible, insertion and moving traces strictly ascending")


def test_criterion_12_performance_smoke():
    rng = np.random.default_rng(120_001)
    v = rng.uniform(-1.0, 1.0, size=(3000, 3000))
    np.fill_diagonal(v, 0.0)
    start = time.perf_counter()
    inst = Instance(v)
    _, rep = four_approx_preorder(inst)
    dicut_elapsed = time.perf_counter() - start
    assert dicut_elapsed < 10.0
    assert rep.objective >= rep.bound_B / 4.0 - 1e-6

    n = 500
    clusters = rng.integers(0, 20, size=n)
    planted = clusters[:, None] <= clusters[None, :]
    v = np.where(planted, 1.0, -1.0) + rng.uniform(-0.3, 0.3, size=(n, n))
    np.fill_diagonal(v, 0.0)
    inst = Instance(v)
    init, _ = four_approx_preorder(inst)
    start = time.perf_counter()
    rel, rep = greedy_arc_insertion(inst, init)
    insertion_elapsed = time.perf_counter() - start
    assert insertion_elapsed < 60.0
    assert verify_preorder(rel)
    report(12, f"four_approx n=3000 in {dicut_elapsed:.1f} s (< 10 s); "
               f"insertion n=500 from the dicut in {insertion_elapsed:.1f} s "
               f"(< 60 s, {rep.iterations} insertions)")
