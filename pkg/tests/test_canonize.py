import itertools
import random

import pytest
from hypothesis import given, strategies as st

from ramsey_forge.canonize import (
    Block,
    CanonicalProjection,
    EquivalenceRelationTable,
    InnerMap,
    block_canonize,
    er_canonize,
    er_counterexample,
    er_domain,
    er_key,
    er_threshold,
    format_element,
    format_partition,
    index_sets,
    parse_approximation,
    parse_partition,
    planted_er,
    product_canonize,
    product_domain,
    projections_at,
    validate_front,
    validate_inner_nw,
)
from ramsey_forge.errors import ResourceError, ValidationError
from ramsey_forge.genseq import enumerate_AR_n, hypercube, sub_approximations
from ramsey_forge.structures import linear_order

L = linear_order


def verify_er(E, s, I, n):
    """Independent pairwise comparison on [s]^n."""
    elems = list(itertools.combinations(s, n))
    return all(E.related(b, c) == all(b[i] == c[i] for i in I) for b in elems for c in elems)


def test_index_set_order():
    assert index_sets(2) == [(), (0,), (0, 1), (1,)]


def test_er_examples():
    m, n = 5, 2
    eq = planted_er(m, n, (0, 1))
    assert (er_canonize(eq, m, n, 3).s, er_canonize(eq, m, n, 3).I) == ((0, 1, 2), (0, 1))
    one = EquivalenceRelationTable.from_key(er_domain(m, n), lambda b: 0)
    assert er_canonize(one, m, n, 3).I == ()
    by_min = EquivalenceRelationTable.from_key(er_domain(m, n), lambda b: min(b))
    r = er_canonize(by_min, m, n, 3)
    assert r.I == (0,) and verify_er(by_min, r.s, r.I, n)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_planted_round_trip(n):
    m = l = n + 1
    for I in index_sets(n):
        r = er_canonize(planted_er(m + 2, n, I), m + 2, n, l)
        assert r.I == I and r.verified


def test_planted_relations_are_distinct_once_l_exceeds_n():
    n, l = 2, 3
    tables = {I: planted_er(l, n, I).partition for I in index_sets(n)}
    assert len(set(tables.values())) == len(tables)


@given(st.integers(1, 3), st.data())
def test_e_i_monotone(n, data):
    I = data.draw(st.sampled_from(index_sets(n)))
    J = data.draw(st.sampled_from([s for s in index_sets(n) if set(I) <= set(s)]))
    dom = er_domain(n + 2, n)
    for b, c in itertools.combinations(dom, 2):
        if er_key(b, J) == er_key(c, J):
            assert er_key(b, I) == er_key(c, I)


@given(st.integers(0, 2**31 - 1))
def test_er_soundness_on_random_relations(seed):
    rng = random.Random(seed)
    m, n, l = 6, 2, 3
    classes = rng.randint(1, 4)
    E = EquivalenceRelationTable.from_key(er_domain(m, n), lambda b: rng.randrange(classes))
    r = er_canonize(E, m, n, l)
    if r is not None:
        assert verify_er(E, r.s, r.I, n)


def test_not_found_is_a_result():
    # 3 points, a relation separating {0,1} from the rest with l = 3 and n = 1: only one window
    E = EquivalenceRelationTable.from_key(er_domain(3, 1), lambda b: b[0] == 2)
    assert er_canonize(E, 3, 1, 3) is None


def test_thresholds():
    assert er_threshold(1, 2, 6).m == 3
    assert er_threshold(1, 3, 8).m == 5
    assert er_threshold(2, 3, 4).m == 4
    with pytest.raises(ResourceError):
        er_threshold(2, 4, 6, budget=10**5)


def test_threshold_counterexample_is_genuine():
    E, _ = er_counterexample(4, 1, 3)
    assert E is not None and er_canonize(E, 4, 1, 3) is None


def test_product_examples():
    coords = [(L(1), L(2), L(4))]
    dom = product_domain([(L(1), L(4))])
    same_point = EquivalenceRelationTable.from_key(dom, lambda x: x[0][0])
    r = product_canonize(same_point, coords)
    assert r.b_prime == ((0, 1),) and r.selection.sets == ((0,),)
    single = EquivalenceRelationTable.from_key(dom, lambda x: 0)
    assert product_canonize(single, coords).selection.sets == ((),)


def test_product_full_equality_two_coordinates():
    coords = [(L(2), L(3), L(4)), (L(1), L(2), L(3))]
    dom = product_domain([(a, c) for a, _, c in coords])
    E = EquivalenceRelationTable.from_key(dom, lambda x: x)
    r = product_canonize(E, coords)
    assert r.selection.sets == ((0, 1), (0,)) and r.verified


@given(st.integers(0, 2**31 - 1))
def test_product_degenerates_to_er(seed):
    rng = random.Random(seed)
    m, n, l = 5, 2, 3
    I = rng.choice(index_sets(n))
    E = planted_er(m, n, I) if rng.random() < 0.5 else EquivalenceRelationTable.from_key(
        er_domain(m, n), lambda b: rng.randrange(2))
    er = er_canonize(E, m, n, l)
    lifted = EquivalenceRelationTable(tuple((b,) for b in E.domain), E.partition)
    pr = product_canonize(lifted, [(L(n), L(l), L(m))])
    if er is None:
        assert pr is None
    else:
        assert pr.b_prime == (er.s,) and pr.selection.sets == (er.I,)


def test_partition_text_round_trip():
    E = planted_er(4, 2, (0,))
    assert parse_partition(format_partition(E), E.domain).partition == E.partition
    with pytest.raises(ValidationError):
        parse_partition("0,1\n", E.domain)
    with pytest.raises(ValidationError):
        parse_partition("0,1 0,1\n" + format_partition(E), E.domain)


def test_element_formats():
    assert format_element((0, 2)) == "0,2"
    assert format_element(((0, 1), ())) == "0,1/-"
    a = (Block(0, ((0,), (0,))), Block(1, ((0, 1), (1,))))
    assert format_element(a) == "0@0/0;1@0,1/1"
    assert parse_approximation(format_element(a)) == a


def test_projection_family_size():
    seq = hypercube(2)
    assert len(projections_at(seq, 0)) == 1 + 4
    assert len(projections_at(seq, 1)) == 1 + 16


@pytest.mark.parametrize("kind,expected", [
    ("equality", ["E_(0)", "E_(0,1)"]),
    ("depth", ["E_depth", "E_depth"]),
    ("single", ["E_<>", "E_<>"]),
])
def test_block_canonize_examples(kind, expected):
    seq = hypercube(1)
    dom = enumerate_AR_n(seq, 4, 2)
    key = {"equality": lambda a: a, "depth": lambda a: tuple(b.depth for b in a), "single": lambda a: 0}[kind]
    E = EquivalenceRelationTable.from_key(dom, key)
    r = block_canonize(seq, E, 2, 4)
    assert r.verified
    assert expected in [[p.name for p in t] for t in r.canonizations]
    # independent check of the bi-implication on AR_2 | C
    elems = [a for a in sub_approximations(seq, r.c) if len(a) == 2]
    for t in r.canonizations:
        for a, b in itertools.product(elems, repeat=2):
            lhs = E.related(a, b)
            rhs = all(p.apply(x) == p.apply(y) for p, x, y in zip(t, a, b))
            assert lhs == rhs


def test_block_canonize_not_found_within_shallow_prefix():
    seq = hypercube(1)
    dom = enumerate_AR_n(seq, 2, 1)
    E = EquivalenceRelationTable.from_key(dom, lambda a: a)
    r = block_canonize(seq, E, 1, 2, q=3)
    assert r.c is None and r.canonizations == []


def test_fronts():
    seq = hypercube(1)
    ar1 = enumerate_AR_n(seq, 3, 1)
    ar2 = enumerate_AR_n(seq, 3, 2)
    ok = validate_front(ar1, seq, 3)
    assert ok.ok and ok.coverage and "surrogate" in ok.note
    bad = validate_front(ar2[1:], seq, 3)
    assert not bad.coverage and bad.witness["uncovered"]
    clash = validate_front(ar1 + ar2[:1], seq, 3)
    assert not clash.antichain and clash.witness["a"]
    assert validate_front(ar2, seq, 3, mode="sperner").ok
    a = (Block(1, ((0,),)),)
    b = (Block(0, ((0,),)), Block(1, ((0, 1),)))
    assert validate_front([a, b], seq, 3).antichain
    sp = validate_front([a, b], seq, 3, mode="sperner")
    assert not sp.antichain and sp.witness == {"a": [[1, [[0]]]], "b": [[0, [[0]]], [1, [[0, 1]]]]}


def test_inner_maps():
    seq = hypercube(1)
    F = enumerate_AR_n(seq, 3, 1)
    ident = InnerMap({b: (CanonicalProjection("select", ((0,),)),) for b in F})
    assert validate_inner_nw(ident, F, seq).ok
    const = InnerMap({b: (CanonicalProjection.empty(),) for b in F})
    assert validate_inner_nw(const, F, seq).ok
    b = (Block(1, ((0,),)),)
    c = (Block(1, ((1,),)), Block(2, ((0, 1),)))
    d = CanonicalProjection.depth(1)
    rep = validate_inner_nw(InnerMap({b: (d,), c: (d, d)}), [b, c], seq)
    assert rep.inner and not rep.nash_williams and rep.witness
