import json

import pytest
from hypothesis import given, strategies as st

from ramsey_forge.errors import ResourceError, ValidationError
from ramsey_forge.fraisse import COMPLETE_GRAPHS, LINEAR_ORDERS, ORDERED_GRAPHS, TRIANGLE_FREE
from ramsey_forge.genseq import (
    INFINITY,
    OMEGA,
    Block,
    GeneratingSequence,
    a4_families,
    approximation_from_json,
    approximation_to_json,
    block_choices,
    build_sequence,
    check_axioms,
    check_sequence,
    count_AR_n,
    depth_in,
    enumerate_AR_n,
    hypercube,
    is_approximation,
    le_fin,
    manifest,
    one_step_extensions,
    prefix_of,
    sub_approximations,
)
from ramsey_forge.structures import embeds, parse_structure, restrict


def test_linear_order_levels():
    seq = hypercube(1)
    assert [seq.structure(k, 0).size for k in range(6)] == [1, 2, 3, 4, 5, 6]


@pytest.mark.parametrize("cls", [LINEAR_ORDERS, ORDERED_GRAPHS, TRIANGLE_FREE, COMPLETE_GRAPHS])
def test_levels_are_nested_prefixes_in_the_class(cls):
    from ramsey_forge.fraisse import contains

    seq = build_sequence([cls], 8)
    for k in range(8):
        a, b = seq.structure(k, 0), seq.structure(k + 1, 0)
        assert contains(cls, b) and b.size > a.size
        assert restrict(b, seq.embedding(k, 0).map) == a


@pytest.mark.parametrize("cls,levels,cap", [(ORDERED_GRAPHS, 12, 3), (TRIANGLE_FREE, 10, 3), (COMPLETE_GRAPHS, 4, 4)])
def test_cofinality(cls, levels, cap):
    rep = check_sequence(GeneratingSequence([cls]), levels, cap)
    assert rep["base_one_point"] and rep["embeddings_valid"]
    assert rep["cofinal_up_to_size"] == cap and rep["unabsorbed"] == 0


def test_each_level_absorbs_its_target():
    seq = GeneratingSequence([ORDERED_GRAPHS])
    for k in range(1, 10):
        target = seq.absorbed_at(k, 0)
        assert embeds(target, seq.structure(k, 0))
        assert not embeds(target, seq.structure(k - 1, 0))


def test_widths():
    assert hypercube(3).width(5) == 3
    omega = hypercube(OMEGA)
    assert [omega.width(k) for k in range(4)] == [1, 2, 3, 4]
    with pytest.raises(ValidationError):
        omega.structure(1, 2)
    with pytest.raises(ValidationError):
        GeneratingSequence([LINEAR_ORDERS, ORDERED_GRAPHS], 3)
    with pytest.raises(ValidationError):
        GeneratingSequence([], 1)


@pytest.mark.parametrize("m", range(1, 7))
def test_ar1_counts_for_h1(m):
    seq = hypercube(1)
    assert len(enumerate_AR_n(seq, m, 1)) == count_AR_n(seq, m, 1) == m * (m + 1) // 2


def test_ar1_for_h2_depth_2():
    assert len(enumerate_AR_n(hypercube(2), 2, 1)) == 5


def test_ar_budget():
    with pytest.raises(ResourceError):
        enumerate_AR_n(hypercube(2), 5, 2, budget=10)


def test_ar_members_are_valid_and_ordered():
    seq = GeneratingSequence([ORDERED_GRAPHS, LINEAR_ORDERS])
    items = enumerate_AR_n(seq, 4, 2)
    assert all(is_approximation(seq, a) for a in items)
    assert len(set(items)) == len(items)
    assert not is_approximation(seq, (Block(2, ((0,), (0,))), Block(1, ((0, 1), (0, 1)))))


def test_le_fin_and_depth_in():
    seq = hypercube(1)
    big = prefix_of(seq, 3)
    a = (Block(1, ((1,),)),)
    assert le_fin(a, big)
    assert depth_in(a, big) == 2
    assert depth_in((Block(5, ((0,),)),), big) == INFINITY
    assert depth_in((), big) == 0


@st.composite
def chains(draw):
    seq = hypercube(draw(st.integers(1, 2)))
    c = draw(st.sampled_from(enumerate_AR_n(seq, 4, draw(st.integers(0, 3)))))
    b = draw(st.sampled_from(sub_approximations(seq, c)))
    a = draw(st.sampled_from(sub_approximations(seq, b)))
    return seq, a, b, c


@given(chains())
def test_le_fin_is_transitive(ch):
    seq, a, b, c = ch
    assert le_fin(a, b) and le_fin(b, c) and le_fin(a, c)


@given(st.integers(1, 2), st.integers(0, 2), st.data())
def test_sub_approximations_match_scan(J, n, data):
    seq = hypercube(J)
    b = data.draw(st.sampled_from(enumerate_AR_n(seq, 3, n)))
    everything = [x for q in range(n + 1) for x in enumerate_AR_n(seq, 3, q)]
    assert set(sub_approximations(seq, b)) == {x for x in everything if le_fin(x, b)}


def test_one_step_extensions():
    seq = hypercube(1)
    ext = one_step_extensions(seq, (), prefix_of(seq, 3))
    assert ext == enumerate_AR_n(seq, 3, 1)


@pytest.mark.parametrize("J,depth", [(1, 3), (1, 4), (2, 3)])
def test_axioms_pass_on_hypercubes(J, depth):
    report = check_axioms(hypercube(J), depth, max_len=2, samples=60)
    bad = [c.to_dict() for c in report if c.status == "fail" and c.clause != "A.4"]
    assert not bad
    assert {c.clause for c in report} >= {"A.1(a)", "A.1(b)", "A.1(c)", "A.2(a)", "A.2(b)", "A.2(c)", "A.3(a)", "A.3(b)", "A.4"}


def test_a4_on_h1_depth_3_is_a_pigeonhole_instance():
    elems, rows = a4_families(hypercube(1), 3, ())
    # depth pairs (0,1), (0,2), (1,2) carry 1, 3 and 2*3 two-block approximations
    assert len(elems) == 6 and len(rows) == 10
    assert all(len(r) == 3 for r in rows)
    rep = [c for c in check_axioms(hypercube(1), 3) if c.clause == "A.4"][0]
    assert rep.status == "pass"


def test_a4_on_h2_depth_3_fails_honestly():
    # a 3x3 top level is too small for the product pigeonhole; the check must say so
    rep = [c for c in check_axioms(hypercube(2), 3) if c.clause == "A.4"][0]
    assert rep.status == "fail" and rep.detail["coloring"]
    elems, rows = a4_families(hypercube(2), 3, ())
    colors = rep.detail["coloring"]
    assert not any(len({colors[i] for i in r}) == 1 for r in rows)


def test_a4_too_shallow_is_reported_not_fabricated():
    rep = [c for c in check_axioms(hypercube(1), 1, max_len=1) if c.clause == "A.4"][0]
    assert rep.status == "skipped"


def test_manifest_round_trip():
    seq = GeneratingSequence([TRIANGLE_FREE, LINEAR_ORDERS])
    man = json.loads(json.dumps(manifest(seq, 3)))
    assert man["schema"] == 1
    for lvl in man["levels"]:
        for c in lvl["coords"]:
            assert parse_structure(c["structure"]) == seq.structure(lvl["k"], c["j"])


def test_approximation_json_round_trip():
    for a in enumerate_AR_n(hypercube(2), 3, 2):
        assert approximation_from_json(json.dumps(approximation_to_json(a))) == a


def test_block_choices_for_omega():
    seq = hypercube(OMEGA)
    assert len(block_choices(seq, 1, 2)) == 9  # a 2x2 block inside a 3x3 level: 3 * 3
