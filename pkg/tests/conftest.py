import numpy as np
import pytest

from preordering import Instance, Relation, transitive_closure

# ---------------------------------------------------------------------------
# Paper toy instances
# ---------------------------------------------------------------------------

WORKED_EXAMPLE_ENTRIES = [
    (0, 1, 3), (0, 3, 3),
    (1, 0, 4), (1, 2, -1), (1, 3, -1), (1, 4, 1),
    (2, 0, -1), (2, 3, 2), (2, 4, 1),
    (3, 0, -1), (3, 4, 1),
    (4, 0, -1), (4, 1, -1), (4, 2, 2), (4, 3, -1),
]

# the optimal preorder shown alongside it: {0,1} -> {3} -> {4}, {2} -> {3}
WORKED_EXAMPLE_OPTIMAL_PAIRS = [
    (0, 1), (0, 3), (0, 4),
    (1, 0), (1, 3), (1, 4),
    (2, 3), (2, 4),
    (3, 4),
]

ADVERSARIAL_MATRIX = [
    [0, -9976, -20009, -10060, -20099, 10033],
    [-9908, 0, 10025, -19965, 9996, 6],
    [10049, -10048, 0, 10018, -19971, -20025],
    [-19943, -9914, -10076, 0, -19984, 10014],
    [9950, -91, -19988, 10021, 0, -19934],
    [-20025, 10086, 9947, -10032, -10035, 0],
]

ADVERSARIAL_OPTIMUM = 50130.0
ADVERSARIAL_GREEDY_VALUE = 10280.0

ADVERSARIAL_FIXATIONS = [
    (5, 4, 0), (0, 4, 0), (0, 1, 0), (5, 2, 0), (3, 1, 0), (5, 1, 0),
    (0, 2, 0), (3, 4, 0), (3, 2, 0), (5, 0, 0), (5, 3, 0), (2, 1, 0),
    (2, 5, 1), (4, 2, 0), (1, 3, 1), (3, 0, 0), (1, 5, 1), (4, 1, 0),
    (1, 0, 1), (2, 4, 0), (4, 5, 1), (0, 3, 0), (2, 0, 1), (0, 5, 1),
    (1, 2, 1), (4, 3, 1), (2, 3, 1), (3, 5, 1), (1, 4, 1), (4, 0, 1),
]


def worked_example_instance() -> Instance:
    v = np.zeros((5, 5))
    for i, j, c in WORKED_EXAMPLE_ENTRIES:
        v[i, j] = c
    return Instance(v)


def worked_example_optimum_relation() -> Relation:
    return Relation.from_pairs(5, WORKED_EXAMPLE_OPTIMAL_PAIRS)


def chorded_cycle_instance() -> Instance:
    # unit 3-cycle 0->1->2->0 with the three reverse/chord arcs at -1
    v = np.array([
        [0.0, 1.0, -1.0],
        [-1.0, 0.0, 1.0],
        [1.0, -1.0, 0.0],
    ])
    return Instance(v)


def tie_prone_instance() -> Instance:
    v = np.zeros((4, 4))
    for i, j in [(0, 2), (2, 0), (0, 3), (3, 0), (1, 2), (2, 1), (1, 3), (3, 1)]:
        v[i, j] = 1.0
    for i, j in [(0, 1), (1, 0), (2, 3), (3, 2)]:
        v[i, j] = -2.0
    return Instance(v)


def adversarial_instance() -> Instance:
    return Instance(np.array(ADVERSARIAL_MATRIX, dtype=float))


@pytest.fixture(scope="session")
def worked_example():
    return worked_example_instance()


@pytest.fixture(scope="session")
def worked_optimum():
    return worked_example_optimum_relation()


@pytest.fixture(scope="session")
def chorded_cycle():
    return chorded_cycle_instance()


@pytest.fixture(scope="session")
def tie_prone():
    return tie_prone_instance()


@pytest.fixture(scope="session")
def adversarial():
    return adversarial_instance()


# ---------------------------------------------------------------------------
# Random generators (all seeded by the caller)
# ---------------------------------------------------------------------------

def random_instance(rng, n, *, integer=False, low=-1.0, high=1.0) -> Instance:
    if integer:
        v = rng.integers(int(low), int(high) + 1, size=(n, n)).astype(float)
    else:
        v = rng.uniform(low, high, size=(n, n))
    np.fill_diagonal(v, 0.0)
    return Instance(v)


def random_preorder(rng, n, density=None) -> Relation:
    """Closure of a random relation: a varied source of feasible states."""
    if density is None:
        density = rng.uniform(0.1, 0.6)
    x = rng.random((n, n)) < density
    np.fill_diagonal(x, True)
    return transitive_closure(Relation(x))


def random_fractional_point(rng, n) -> np.ndarray:
    return rng.random(n * (n - 1))
