"""Generating sequences and finite approximations of the spaces they generate.

A generating sequence fixes, for every level ``k`` and coordinate
``j < width(k)``, a structure ``A_{k,j}``.  Members of the space are infinite
block sequences; here only finite approximations exist.  A block at position
``k`` is ``Block(depth, parts)`` where ``parts[j]`` is the index set of a copy
of ``A_{k,j}`` inside ``A_{depth,j}``.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import ResourceError, ValidationError
from .fraisse import DEFAULT_MEMBER_BUDGET, FraisseClass, contains, enumerate_members
from .structures import (
    Embedding,
    OrderedStructure,
    embeds,
    format_structure,
    iter_copies,
    restrict,
)

OMEGA = "omega"
INFINITY = math.inf
DEFAULT_AR_BUDGET = 2**20


class _ClassChain:
    """The per-class chain ``A_0 <= A_1 <= ...`` with an absorption schedule.

    ``A_0`` is the one-point member.  ``A_{k+1}`` appends as few points as
    possible to ``A_k`` so that the first member (by size, then enumeration
    order) not yet embeddable in ``A_k`` becomes embeddable.  ``A_k`` is kept
    as an initial segment, so every recorded embedding is an identity prefix.
    """

    def __init__(self, cls: FraisseClass, budget: int = DEFAULT_MEMBER_BUDGET):
        self.cls = cls
        self.budget = budget
        one = enumerate_members(cls, 1, budget)
        if len(one) != 1:
            raise ValidationError(f"class {cls.name} needs exactly one one-point member, has {len(one)}")
        self.levels: list[OrderedStructure] = [one[0]]
        self.absorbed: list[OrderedStructure | None] = [None]

    def level(self, k: int) -> OrderedStructure:
        while len(self.levels) <= k:
            self._extend()
        return self.levels[k]

    def _next_target(self, a: OrderedStructure) -> OrderedStructure:
        for s in range(1, a.size + 2):
            for m in enumerate_members(self.cls, s, self.budget):
                if not embeds(m, a):
                    return m
        raise ResourceError(f"class {self.cls.name} has no member of size {a.size + 1}")

    def _extend(self) -> None:
        a = self.levels[-1]
        target = self._next_target(a)
        for t in range(1, target.size + 1):
            head = restrict(target, range(target.size - t))
            for s in iter_copies(head, a):
                place = list(s) + list(range(a.size, a.size + t))
                tables = {}
                for name, ta, tm in zip(self.cls.signature.names, a.tables, target.tables):
                    new = [tuple(place[i] for i in tup) for tup in tm if max(tup) >= target.size - t]
                    tables[name] = list(ta) + new
                cand = OrderedStructure.build(self.cls.signature, a.size + t, tables)
                if restrict(cand, place) == target and contains(self.cls, cand):
                    self.levels.append(cand)
                    self.absorbed.append(target)
                    return
        raise ResourceError(f"joint embedding of level {len(self.levels) - 1} with {target!r} failed")

    def embedding(self, k: int) -> Embedding:
        return Embedding(tuple(range(self.level(k).size)))


@lru_cache(maxsize=64)
def _chain(cls: FraisseClass) -> _ClassChain:
    return _ClassChain(cls)


class Block(NamedTuple):
    depth: int
    parts: tuple[tuple[int, ...], ...]


Approximation = tuple[Block, ...]


class GeneratingSequence:
    """A lazily extended generating sequence over one or more classes.

    ``width`` is either a positive integer (finitely many coordinates) or
    :data:`OMEGA`, in which case level ``k`` has ``k + 1`` coordinates and
    coordinate ``j`` uses ``classes[j % len(classes)]``.
    """

    def __init__(self, classes: Sequence[FraisseClass], width: int | str | None = None):
        classes = tuple(classes)
        if not classes:
            raise ValidationError("a generating sequence needs at least one class")
        if width is None:
            width = len(classes)
        if width != OMEGA:
            if not isinstance(width, int) or width < 1:
                raise ValidationError(f"width must be a positive integer or {OMEGA!r}")
            if len(classes) == 1:
                classes = classes * width
            if len(classes) != width:
                raise ValidationError("give one class per coordinate, or a single class")
        self.classes = classes
        self.J = width

    @property
    def finite(self) -> bool:
        return self.J != OMEGA

    def width(self, k: int) -> int:
        return self.J if self.finite else k + 1

    def cls(self, j: int) -> FraisseClass:
        return self.classes[j % len(self.classes)]

    def structure(self, k: int, j: int) -> OrderedStructure:
        if j >= self.width(k):
            raise ValidationError(f"coordinate {j} does not exist at level {k}")
        return _chain(self.cls(j)).level(k)

    def level(self, k: int) -> tuple[OrderedStructure, ...]:
        return tuple(self.structure(k, j) for j in range(self.width(k)))

    def embedding(self, k: int, j: int) -> Embedding:
        """Recorded embedding of ``A_{k,j}`` into ``A_{k+1,j}``."""
        return _chain(self.cls(j)).embedding(k)

    def absorbed_at(self, k: int, j: int) -> OrderedStructure | None:
        chain = _chain(self.cls(j))
        chain.level(k)
        return chain.absorbed[k]

    def describe(self) -> dict:
        return {"classes": [c.describe() for c in self.classes], "J": self.J}

    def __repr__(self) -> str:
        return f"GeneratingSequence({[c.name for c in self.classes]}, J={self.J})"


def build_sequence(classes: Sequence[FraisseClass], k_max: int, width: int | str | None = None) -> GeneratingSequence:
    seq = GeneratingSequence(classes, width)
    for k in range(k_max + 1):
        seq.level(k)
    return seq


def hypercube(n: int | str) -> GeneratingSequence:
    """The hypercube space over linear orders with ``n`` coordinates (or OMEGA)."""
    from .fraisse import LINEAR_ORDERS

    return GeneratingSequence([LINEAR_ORDERS], n)


def check_sequence(seq: GeneratingSequence, k_max: int, size_cap: int) -> dict:
    """Check the structural clauses on levels ``0..k_max``.

    One-point base level, recorded embeddings valid, and a cofinality ledger:
    the first level at which each member of size ``<= size_cap`` embeds.
    """
    base_ok = all(seq.structure(0, j).size == 1 for j in range(seq.width(0)))
    emb_ok = True
    for k in range(k_max):
        for j in range(seq.width(k)):
            e = seq.embedding(k, j)
            if restrict(seq.structure(k + 1, j), e.map) != seq.structure(k, j):
                emb_ok = False
    ledger = {}
    missing = []
    coords = range(seq.width(0)) if not seq.finite else range(seq.J)
    for j in coords:
        rows = []
        for s in range(1, size_cap + 1):
            for m in enumerate_members(seq.cls(j), s):
                at = next((k for k in range(j if not seq.finite else 0, k_max + 1)
                           if j < seq.width(k) and embeds(m, seq.structure(k, j))), None)
                rows.append({"member": format_structure(m), "level": at})
                if at is None:
                    missing.append((j, format_structure(m)))
        ledger[j] = rows
    return {
        "base_one_point": base_ok,
        "embeddings_valid": emb_ok,
        "cofinal_up_to_size": size_cap if not missing else None,
        "unabsorbed": len(missing),
        "ledger": ledger,
        "pigeonhole": "assumed (guaranteed by the Ramsey property; see pigeonhole_check)",
    }


# -- blocks and approximations -----------------------------------------------

def block_choices(seq: GeneratingSequence, k: int, depth: int) -> list[Block]:
    """All blocks at position ``k`` living at ``depth``, in lexicographic order."""
    return list(_block_choices(seq, k, depth))


@lru_cache(maxsize=4096)
def _block_choices_cached(classes, J, k, depth):
    seq = GeneratingSequence(classes, J)
    if depth < 0:
        return ()
    per = [tuple(iter_copies(seq.structure(k, j), seq.structure(depth, j))) for j in range(seq.width(k))]
    return tuple(Block(depth, parts) for parts in itertools.product(*per))


def _block_choices(seq, k, depth):
    return _block_choices_cached(seq.classes, seq.J, k, depth)


def is_approximation(seq: GeneratingSequence, a: Sequence[Block]) -> bool:
    depths = [b.depth for b in a]
    if any(x >= y for x, y in zip(depths, depths[1:])):
        return False
    for k, blk in enumerate(a):
        if len(blk.parts) != seq.width(k):
            return False
        for j, part in enumerate(blk.parts):
            part = tuple(part)
            if any(x >= y for x, y in zip(part, part[1:])):
                return False
            big = seq.structure(blk.depth, j)
            if part and (part[0] < 0 or part[-1] >= big.size):
                return False
            if restrict(big, part) != seq.structure(k, j):
                return False
    return True


def count_AR_n(seq: GeneratingSequence, depth: int, n: int) -> int:
    total = 0
    for dv in itertools.combinations(range(depth), n):
        total += math.prod(len(_block_choices(seq, i, d)) for i, d in enumerate(dv))
    return total


def enumerate_AR_n(seq: GeneratingSequence, depth: int, n: int, budget: int = DEFAULT_AR_BUDGET) -> list[Approximation]:
    """All ``n``-block approximations whose blocks lie below ``depth``.

    Ordered by depth vector, then lexicographically by block copies.
    """
    if n == 0:
        return [()]
    cost = count_AR_n(seq, depth, n)
    if cost > budget:
        raise ResourceError(f"AR_{n} at depth {depth} has {cost} members, budget is {budget}", cost=cost, budget=budget)
    out = []
    for dv in itertools.combinations(range(depth), n):
        out.extend(itertools.product(*[_block_choices(seq, i, d) for i, d in enumerate(dv)]))
    return out


def prefix_of(seq: GeneratingSequence, depth: int) -> Approximation:
    """``r_depth`` of the maximal member: block ``k`` is all of level ``k`` at depth ``k``."""
    return tuple(
        Block(k, tuple(tuple(range(seq.structure(k, j).size)) for j in range(seq.width(k))))
        for k in range(depth)
    )


def le_fin(c: Sequence[Block], b: Sequence[Block]) -> bool:
    """``c <=_fin b``: each block of ``c`` sits inside the block of ``b`` at the same depth."""
    at = {blk.depth: blk for blk in b}
    for blk in c:
        host = at.get(blk.depth)
        if host is None or len(host.parts) < len(blk.parts):
            return False
        for part, hpart in zip(blk.parts, host.parts):
            if not set(part) <= set(hpart):
                return False
    return True


def is_initial_segment(a: Sequence[Block], b: Sequence[Block], proper: bool = False) -> bool:
    return len(a) <= len(b) - (1 if proper else 0) and tuple(b[: len(a)]) == tuple(a)


def depth_in(a: Sequence[Block], b: Sequence[Block]) -> int | float:
    """Least ``d`` with ``a <=_fin r_d(b)``, or :data:`INFINITY`."""
    for d in range(len(b) + 1):
        if le_fin(a, b[:d]):
            return d
    return INFINITY


def sub_approximations(seq: GeneratingSequence, b: Sequence[Block]) -> list[Approximation]:
    """All approximations ``a <=_fin b``, built directly from ``b``'s blocks."""
    out: list[Approximation] = [()]
    for q in range(1, len(b) + 1):
        for hosts in itertools.combinations(range(len(b)), q):
            per_block = []
            for k, l in enumerate(hosts):
                host = b[l]
                if seq.width(k) > len(host.parts):
                    per_block = None
                    break
                opts = []
                per_coord = []
                for j in range(seq.width(k)):
                    hpart = host.parts[j]
                    inner = restrict(seq.structure(host.depth, j), hpart)
                    per_coord.append([tuple(hpart[i] for i in cp) for cp in iter_copies(seq.structure(k, j), inner)])
                for parts in itertools.product(*per_coord):
                    opts.append(Block(host.depth, parts))
                per_block.append(opts)
            if per_block is None:
                continue
            out.extend(itertools.product(*per_block))
    return out


def one_step_extensions(seq: GeneratingSequence, a: Sequence[Block], host: Sequence[Block]) -> list[Approximation]:
    """``r_{|a|+1}[a, host]``: approximations ``a + (block,)`` that are ``<=_fin host``."""
    k = len(a)
    last = a[-1].depth if a else -1
    out = []
    for hblk in host:
        if hblk.depth <= last or len(hblk.parts) < seq.width(k):
            continue
        per_coord = []
        for j in range(seq.width(k)):
            inner = restrict(seq.structure(hblk.depth, j), hblk.parts[j])
            per_coord.append([tuple(hblk.parts[j][i] for i in cp) for cp in iter_copies(seq.structure(k, j), inner)])
        for parts in itertools.product(*per_coord):
            out.append(tuple(a) + (Block(hblk.depth, parts),))
    return out


# -- axioms on a finite prefix ------------------------------------------------

@dataclass
class AxiomCheck:
    clause: str
    status: str  # pass | fail | skipped
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"clause": self.clause, "status": self.status, **self.detail}


def check_axioms(
    seq: GeneratingSequence,
    depth: int,
    max_len: int = 2,
    a4_len: int = 0,
    samples: int = 200,
    seed: int = 0,
    budget: int = DEFAULT_AR_BUDGET,
    backend: str | None = None,
) -> list[AxiomCheck]:
    """Check A.1 and A.2 exhaustively on approximations of length ``<= max_len``
    below ``depth``; spot-check A.3 on ``samples`` seeded draws; check A.4 for
    ``|a| = a4_len`` by exhaustive 2-colorings of ``AR_{|a|+1}``."""
    report: list[AxiomCheck] = []
    levels = [enumerate_AR_n(seq, depth, n, budget) for n in range(max_len + 1)]
    everything = [a for lvl in levels for a in lvl]
    pairs = len(everything) ** 2
    if pairs > budget:
        raise ResourceError(f"axiom check needs {pairs} pair comparisons, budget is {budget}", cost=pairs, budget=budget)

    report.append(AxiomCheck("A.1(a)", "pass" if levels[0] == [()] else "fail", {"AR_0": len(levels[0])}))

    signatures = {}
    ok_b = True
    for a in everything:
        key = tuple(a[:n] for n in range(len(a) + 1))
        if signatures.setdefault(key, a) != a:
            ok_b = False
    report.append(AxiomCheck("A.1(b)", "pass" if ok_b else "fail", {"approximations": len(everything)}))

    ok_c = all(is_approximation(seq, a) for a in everything)
    seen: dict[Approximation, int] = {}
    for a in everything:
        for n in range(len(a) + 1):
            prev = seen.setdefault(a[:n], n)
            if prev != n:
                ok_c = False
    report.append(AxiomCheck("A.1(c)", "pass" if ok_c else "fail", {}))

    ok_2a, sizes = True, []
    for b in everything:
        direct = set(sub_approximations(seq, b))
        scanned = {a for a in everything if len(a) <= len(b) and le_fin(a, b)}
        if scanned != {a for a in direct if len(a) <= max_len}:
            ok_2a = False
        sizes.append(len(direct))
    report.append(AxiomCheck("A.2(a)", "pass" if ok_2a else "fail", {"max_below": max(sizes), "checked": len(everything)}))

    ok_2b = True
    for a in everything:
        for b in everything:
            lhs = le_fin(a, b)
            rhs = all(any(le_fin(a[:n], b[:m]) for m in range(len(b) + 1)) for n in range(len(a) + 1))
            if lhs != rhs:
                ok_2b = False
    report.append(AxiomCheck("A.2(b)", "pass" if ok_2b else "fail", {"pairs": pairs}))

    ok_2c, triples = True, 0
    for b in everything:
        for c in everything:
            if not le_fin(b, c):
                continue
            for n in range(len(b)):
                triples += 1
                a = b[:n]
                if not any(le_fin(a, c[:m]) for m in range(len(c))):
                    ok_2c = False
    report.append(AxiomCheck("A.2(c)", "pass" if ok_2c else "fail", {"triples": triples}))

    report.extend(_check_a3(seq, levels[-1], samples, seed))
    report.append(_check_a4(seq, depth, a4_len, budget, backend))
    return report


def _check_a3(seq, longest, samples, seed):
    rng = random.Random(seed)
    if not longest or not longest[0]:
        return [AxiomCheck("A.3(a)", "skipped", {"reason": "no approximations of positive length"}),
                AxiomCheck("A.3(b)", "skipped", {"reason": "no approximations of positive length"})]
    ok_a = ok_b = True
    done_a = done_b = 0
    for _ in range(samples):
        big = rng.choice(longest)
        subs = sub_approximations(seq, big)
        a = rng.choice(subs)
        n = depth_in(a, big)
        if n == INFINITY:
            ok_a = False
            continue
        # members of [depth_B(a), B]: A <=_fin B extending r_n(B)
        cands = [x for x in sub_approximations(seq, big) if len(x) == len(big) and x[:n] == big[:n]]
        A = rng.choice(cands)
        done_a += 1
        if not le_fin(a, A):
            ok_a = False
        # A.3(b): A <= B with a <=_fin A; A' = r_n(B) + A beyond n
        A = rng.choice([x for x in subs if len(x) == len(big)] or [big])
        if not le_fin(a, A) or len(A) <= n:
            continue
        done_b += 1
        A2 = tuple(big[:n]) + tuple(A[n:])
        if not (is_approximation(seq, A2) and le_fin(A2, big) and le_fin(a, A2)):
            ok_b = False
            continue
        if len(a) < len(big):
            ext2 = set(one_step_extensions(seq, a, A2))
            ext = set(one_step_extensions(seq, a, A))
            if not ext2 or not ext2 <= ext:
                ok_b = False
    return [
        AxiomCheck("A.3(a)", "pass" if ok_a else "fail", {"samples": done_a, "sampled": True}),
        AxiomCheck("A.3(b)", "pass" if ok_b else "fail", {"samples": done_b, "sampled": True}),
    ]


def a4_families(seq: GeneratingSequence, depth: int, a: Sequence[Block], budget: int = DEFAULT_AR_BUDGET):
    """Elements of ``r_{|a|+1}[a, prefix]`` and, for each two-block-longer ``A``
    extending ``a``, the indices of the elements lying below ``A``."""
    n = len(a)
    prefix = prefix_of(seq, depth)
    elems = one_step_extensions(seq, a, prefix)
    index = {x: i for i, x in enumerate(elems)}
    rows = []
    last = a[-1].depth if a else -1
    for d1, d2 in itertools.combinations(range(last + 1, depth), 2):
        for b1 in _block_choices(seq, n, d1):
            for b2 in _block_choices(seq, n + 1, d2):
                host = tuple(a) + (b1, b2)
                rows.append(sorted(index[x] for x in one_step_extensions(seq, a, host)))
                if len(rows) > budget:
                    raise ResourceError("A.4 family count exceeds budget", cost=len(rows), budget=budget)
    return elems, rows


def _check_a4(seq, depth, a4_len, budget, backend):
    candidates = enumerate_AR_n(seq, depth, a4_len, budget)
    worst = 0
    for a in candidates:
        elems, rows = a4_families(seq, depth, a, budget)
        if not rows:
            return AxiomCheck("A.4", "skipped", {"reason": f"prefix depth {depth} too shallow for |a|={a4_len}"})
        colorings = 2 ** len(elems)
        worst = max(worst, colorings)
        if colorings > budget:
            return AxiomCheck("A.4", "skipped", {"reason": "over budget", "cost": colorings, "budget": budget})
        free = kernels.first_free_coloring(np.array(rows, dtype=np.int64), len(elems), 2, backend)
        if free is not None:
            return AxiomCheck("A.4", "fail", {"a": approximation_to_json(a), "coloring": free})
    return AxiomCheck("A.4", "pass", {"|a|": a4_len, "approximations": len(candidates), "max_colorings": worst})


# -- serialization ------------------------------------------------------------

def approximation_to_json(a: Sequence[Block]) -> list:
    return [[blk.depth, [list(p) for p in blk.parts]] for blk in a]


def approximation_from_json(data) -> Approximation:
    if isinstance(data, str):
        data = json.loads(data)
    return tuple(Block(int(d), tuple(tuple(int(i) for i in p) for p in parts)) for d, parts in data)


def manifest(seq: GeneratingSequence, k_max: int) -> dict:
    levels = []
    for k in range(k_max + 1):
        coords = []
        for j in range(seq.width(k)):
            coords.append({
                "j": j,
                "structure": format_structure(seq.structure(k, j)),
                "embedding_into_next": list(seq.embedding(k, j).map),
            })
        levels.append({"k": k, "coords": coords})
    return {"schema": 1, "sequence": seq.describe(), "levels": levels}
