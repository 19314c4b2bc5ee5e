import itertools

import numpy as np
import pytest

from ramsey_forge import kernels
from ramsey_forge.errors import ResourceError, ValidationError
from ramsey_forge.fraisse import LINEAR_ORDERS
from ramsey_forge.genseq import hypercube
from ramsey_forge.ramsey import (
    ArrowQuery,
    arrow_check,
    arrow_cost,
    arrow_report,
    copy_families,
    find_witness,
    is_homogeneous_somewhere,
    pigeonhole_check,
    size_schedule,
)
from ramsey_forge.structures import graph, linear_order

L = linear_order
BACKENDS = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])


@pytest.mark.parametrize("backend", BACKENDS)
def test_r33(backend):
    assert arrow_check(ArrowQuery.single(L(2), L(3), L(6)), backend=backend)
    rep = arrow_report(ArrowQuery.single(L(2), L(3), L(5)), backend=backend)
    assert not rep["result"]
    copies, rows = copy_families(ArrowQuery.single(L(2), L(3), L(5)))
    assert not is_homogeneous_somewhere(rows, rep["counterexample"]["colors"])


def test_counterexample_for_five_points_is_a_pentagon_coloring():
    rep = arrow_report(ArrowQuery.single(L(2), L(3), L(5)))
    copies = [tuple(c[0]) for c in rep["counterexample"]["copies"]]
    colors = dict(zip(copies, rep["counterexample"]["colors"]))
    for t in itertools.combinations(range(5), 3):
        assert len({colors[p] for p in itertools.combinations(t, 2)}) == 2


def test_cost_and_budget():
    q = ArrowQuery.single(L(2), L(3), L(6))
    assert arrow_cost(q) == (15, 2**15)
    with pytest.raises(ResourceError) as exc:
        arrow_report(q, budget=2**14)
    assert exc.value.cost == 2**15


def test_query_validation():
    with pytest.raises(ValidationError):
        ArrowQuery.single(L(3), L(2), L(5))
    with pytest.raises(ValidationError):
        ArrowQuery.single(L(1), L(2), L(3), k=0)


def test_pigeonhole_single_coordinate():
    assert arrow_check(ArrowQuery.single(L(1), L(2), L(3)))
    assert not arrow_check(ArrowQuery.single(L(1), L(2), L(2)))
    assert not arrow_check(ArrowQuery.single(L(1), L(3), L(4), k=3))
    assert arrow_check(ArrowQuery.single(L(1), L(2), L(4), k=3))


def test_ordered_graph_vertex_colouring():
    # 2-colour the vertices of an edgeless 3-point graph: some edgeless pair is monochromatic
    assert arrow_check(ArrowQuery.single(graph(1), graph(2), graph(3)))
    e = graph(2, [(0, 1)])
    assert arrow_check(ArrowQuery.single(graph(1), e, graph(3, [(0, 1), (0, 2), (1, 2)])))


def rectangle_free_colouring_exists(rows, cols):
    """Oracle: brute force over all 2-colourings of a rows x cols grid for one
    with no monochromatic rectangle (two rows times two columns)."""
    cells = rows * cols
    rects = [(a * cols + c, a * cols + d, b * cols + c, b * cols + d)
             for a, b in itertools.combinations(range(rows), 2)
             for c, d in itertools.combinations(range(cols), 2)]
    idx = np.array(rects, dtype=np.int64)
    for lo in range(0, 2**cells, 1 << 16):
        codes = np.arange(lo, min(2**cells, lo + (1 << 16)), dtype=np.int64)
        bits = (codes[:, None] >> np.arange(cells)) & 1
        vals = bits[:, idx]
        mono = (vals == vals[:, :, :1]).all(axis=2).any(axis=1)
        if not mono.all():
            return True
    return False


def test_product_witness_matches_rectangle_argument():
    w = find_witness([LINEAR_ORDERS, LINEAR_ORDERS], [L(1), L(1)], [L(2), L(2)], k=2, size_cap=8)
    assert w.sizes == (3, 7)
    # 3 rows give 3 row pairs; with 2 colours, 7 columns force two equal column patterns
    assert not rectangle_free_colouring_exists(3, 7)
    assert rectangle_free_colouring_exists(3, 6)
    assert rectangle_free_colouring_exists(2, 8)


def test_find_witness_single():
    assert find_witness([LINEAR_ORDERS], [L(2)], [L(3)]).sizes == (6,)
    assert find_witness([LINEAR_ORDERS], [L(2)], [L(3)], size_cap=5) is None


def test_size_schedule_order():
    assert size_schedule([1, 1], 2) == [(1, 1), (1, 2), (2, 1), (2, 2)]


def test_pigeonhole_on_sequences():
    assert pigeonhole_check(hypercube(1), 0, 1, 2)
    seq = hypercube(2)
    # A_0 one point per coordinate; A_1 = 2x2, A_2 = 3x3: rectangles in a 3x3 grid are avoidable
    assert not pigeonhole_check(seq, 0, 1, 2)
    with pytest.raises(ValidationError):
        pigeonhole_check(seq, 1, 1, 2)
