"""Canonical equivalence relations on finite domains.

Covers the finite Erdős–Rado canonizer on ``[m]^n``, its product version over
copy tuples, block-level canonization of approximations, and validation of
fronts and inner Nash-Williams maps.  Every returned canonization is
re-verified by a separate pairwise loop before it is reported.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

from . import kernels
from .errors import ResourceError, ValidationError
from .genseq import (
    Approximation,
    Block,
    GeneratingSequence,
    approximation_to_json,
    enumerate_AR_n,
    is_approximation,
    le_fin,
    sub_approximations,
)
from .structures import OrderedStructure, iter_copies

DEFAULT_PARTITION_BUDGET = 2**22
FRONT_NOTE = "coverage checked on every maximal block path of the truncated prefix (finite surrogate)"


# -- tables -------------------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceRelationTable:
    domain: tuple
    partition: tuple[int, ...]

    def __post_init__(self):
        if len(self.domain) != len(self.partition):
            raise ValidationError("every domain element needs exactly one class id")
        if len(set(self.domain)) != len(self.domain):
            raise ValidationError("domain elements must be distinct")

    @classmethod
    def from_key(cls, domain: Sequence, key: Callable[[object], Hashable]) -> "EquivalenceRelationTable":
        ids: dict = {}
        return cls(tuple(domain), tuple(ids.setdefault(key(x), len(ids)) for x in domain))

    @classmethod
    def from_classes(cls, domain: Sequence, classes: Sequence[Sequence]) -> "EquivalenceRelationTable":
        where = {}
        for cid, members in enumerate(classes):
            for x in members:
                if x in where:
                    raise ValidationError(f"element {x!r} appears in two classes")
                where[x] = cid
        missing = [x for x in domain if x not in where]
        if missing:
            raise ValidationError(f"element {missing[0]!r} is in no class")
        extra = set(where) - set(domain)
        if extra:
            raise ValidationError(f"element {sorted(extra)[0]!r} is outside the domain")
        return cls(tuple(domain), tuple(where[x] for x in domain))

    def class_of(self, x) -> int:
        return self.partition[self._index[x]]

    @property
    def _index(self) -> dict:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {x: i for i, x in enumerate(self.domain)}
            object.__setattr__(self, "_idx", idx)
        return idx

    def related(self, x, y) -> bool:
        return self.class_of(x) == self.class_of(y)

    def classes(self) -> list[list]:
        out: dict[int, list] = {}
        for x, c in zip(self.domain, self.partition):
            out.setdefault(c, []).append(x)
        return [out[c] for c in sorted(out)]


def same_partition(elems: Sequence, a: Callable, b: Callable) -> bool:
    """Whether two class-key functions induce the same partition of ``elems``."""
    fwd: dict = {}
    back: dict = {}
    for x in elems:
        ka, kb = a(x), b(x)
        if fwd.setdefault(ka, kb) != kb or back.setdefault(kb, ka) != ka:
            return False
    return True


def pairwise_agree(elems: Sequence, rel: Callable, canon: Callable) -> bool:
    """Independent re-verification: compare both relations on every pair."""
    return all(rel(x, y) == canon(x, y) for x, y in itertools.combinations(elems, 2))


def index_sets(n: int) -> list[tuple[int, ...]]:
    """All subsets of ``range(n)`` ordered by their sorted tuples: () < (0,) < (0,1) < (1,)."""
    return sorted(
        (c for r in range(n + 1) for c in itertools.combinations(range(n), r)),
    )


# -- Erdős–Rado ---------------------------------------------------------------

def er_key(b: Sequence[int], I: Sequence[int]) -> tuple:
    return tuple(b[i] for i in I)


@dataclass(frozen=True)
class ERCanonization:
    s: tuple[int, ...]
    I: tuple[int, ...]
    verified: bool

    def to_dict(self) -> dict:
        return {"schema": 1, "witness": list(self.s), "index_sets": [list(self.I)], "verified": self.verified}


def er_domain(m: int, n: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(m), n))


def er_canonize(E: EquivalenceRelationTable, m: int, n: int, l: int) -> ERCanonization | None:
    """Lexicographically least ``(s, I)`` with ``E`` equal to ``E_I`` on ``[s]^n``.

    Returns ``None`` when ``m`` is too small for a canonizing ``s`` to exist.
    """
    if l < n:
        raise ValidationError("need l >= n")
    if l > m:
        return None
    dom = er_domain(m, n)
    if set(E.domain) != set(dom):
        raise ValidationError(f"relation must be defined on all {n}-subsets of range({m})")
    sets = index_sets(n)
    for s in itertools.combinations(range(m), l):
        elems = list(itertools.combinations(s, n))
        for I in sets:
            if same_partition(elems, E.class_of, lambda b, I=I: er_key(b, I)):
                ok = pairwise_agree(elems, E.related, lambda x, y, I=I: er_key(x, I) == er_key(y, I))
                if not ok:  # pragma: no cover - the two checks are equivalent
                    raise AssertionError("canonization failed re-verification")
                return ERCanonization(s, I, ok)
    return None


def planted_er(m: int, n: int, I: Sequence[int]) -> EquivalenceRelationTable:
    return EquivalenceRelationTable.from_key(er_domain(m, n), lambda b: er_key(b, I))


def bell(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


@dataclass
class ThresholdResult:
    n: int
    l: int
    m: int | None
    scanned: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"schema": 1, "n": self.n, "l": self.l, "m": self.m, "partitions_scanned": self.scanned}


def _threshold_tables(m: int, n: int, l: int):
    dom = er_domain(m, n)
    index = {b: i for i, b in enumerate(dom)}
    sets = index_sets(n)
    windows = list(itertools.combinations(range(m), l))
    pos = np.array([[index[b] for b in itertools.combinations(s, n)] for s in windows], dtype=np.int64)
    labels = np.zeros((len(windows), len(sets), pos.shape[1]), dtype=np.int64)
    for w, s in enumerate(windows):
        for t, I in enumerate(sets):
            ids: dict = {}
            for p, b in enumerate(itertools.combinations(s, n)):
                labels[w, t, p] = ids.setdefault(er_key(b, I), len(ids))
    return dom, pos, labels


def er_counterexample(m: int, n: int, l: int, budget: int = DEFAULT_PARTITION_BUDGET, backend: str | None = None):
    """First partition of ``[m]^n`` (restricted growth order) with no canonizing window."""
    size = math.comb(m, n)
    if bell(size) > budget:
        raise ResourceError(f"Bell({size}) partitions exceed budget {budget}", cost=bell(size), budget=budget)
    dom, pos, labels = _threshold_tables(m, n, l)
    status, rgs, scanned = kernels.scan_partitions(len(dom), pos, labels, budget, backend)
    if status == "counterexample":
        return EquivalenceRelationTable(tuple(dom), tuple(rgs)), scanned
    return None, scanned


def er_threshold(n: int, l: int, m_cap: int, budget: int = DEFAULT_PARTITION_BUDGET, backend: str | None = None) -> ThresholdResult:
    """Least ``m`` in ``(l, m_cap]`` such that every relation on ``[m]^n`` canonizes.

    Each candidate ``m`` scans all Bell(C(m, n)) partitions; a candidate over
    budget raises :class:`ResourceError` before any work is done.
    """
    if not 1 <= n <= l:
        raise ValidationError("need 1 <= n <= l")
    result = ThresholdResult(n, l, None)
    for m in range(l + 1, m_cap + 1):
        bad, scanned = er_counterexample(m, n, l, budget, backend)
        result.scanned[m] = scanned
        if bad is None:
            result.m = m
            return result
    return result


# -- products -----------------------------------------------------------------

@dataclass(frozen=True)
class IndexSelection:
    sets: tuple[tuple[int, ...], ...]

    def validate(self, sizes: Sequence[int]) -> None:
        if len(self.sets) != len(sizes):
            raise ValidationError("one index set per coordinate")
        for I, n in zip(self.sets, sizes):
            if any(not 0 <= i < n for i in I) or list(I) != sorted(set(I)):
                raise ValidationError(f"index set {I} out of range for a {n}-point structure")

    def key(self, copies: Sequence[Sequence[int]]) -> tuple:
        return tuple(tuple(cp[i] for i in I) for cp, I in zip(copies, self.sets))


@dataclass(frozen=True)
class ProductCanonization:
    b_prime: tuple[tuple[int, ...], ...]
    selection: IndexSelection
    verified: bool

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "witness": [list(b) for b in self.b_prime],
            "index_sets": [list(I) for I in self.selection.sets],
            "verified": self.verified,
        }


def product_domain(coords: Sequence[tuple[OrderedStructure, OrderedStructure]]) -> list[tuple]:
    """Copy tuples ``prod_j (C_j choose A_j)`` in lexicographic product order."""
    return list(itertools.product(*[list(iter_copies(a, c)) for a, c in coords]))


def product_canonize(
    E: EquivalenceRelationTable,
    coords: Sequence[tuple[OrderedStructure, OrderedStructure, OrderedStructure]],
    budget: int = DEFAULT_PARTITION_BUDGET,
) -> ProductCanonization | None:
    """Least ``(B'_j)`` and ``(I_j)`` making ``E`` canonical on ``prod (B'_j choose A_j)``."""
    dom = product_domain([(a, c) for a, b, c in coords])
    if set(E.domain) != set(dom):
        raise ValidationError("relation must cover every copy tuple of the product")
    b_copies = [list(iter_copies(b, c)) for a, b, c in coords]
    a_in_b = [list(iter_copies(a, b)) for a, b, c in coords]
    cost = math.prod(len(x) for x in b_copies) * math.prod(2 ** a.size for a, b, c in coords)
    if cost > budget:
        raise ResourceError(f"product canonization needs {cost} candidate checks", cost=cost, budget=budget)
    selections = [IndexSelection(t) for t in itertools.product(*[index_sets(a.size) for a, b, c in coords])]
    for bp in itertools.product(*b_copies):
        elems = list(itertools.product(*[
            [tuple(bp[j][i] for i in cp) for cp in a_in_b[j]] for j in range(len(coords))
        ]))
        for sel in selections:
            if same_partition(elems, E.class_of, sel.key):
                ok = pairwise_agree(elems, E.related, lambda x, y, sel=sel: sel.key(x) == sel.key(y))
                if not ok:  # pragma: no cover
                    raise AssertionError("canonization failed re-verification")
                return ProductCanonization(tuple(bp), sel, ok)
    return None


# -- blocks -------------------------------------------------------------------

@dataclass(frozen=True)
class CanonicalProjection:
    """``EMPTY`` forgets the block; ``SELECT`` keeps the depth and ``parts[j][I_j]``."""

    kind: str
    sets: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.kind not in ("empty", "select"):
            raise ValidationError(f"unknown projection kind {self.kind!r}")

    @classmethod
    def empty(cls) -> "CanonicalProjection":
        return cls("empty")

    @classmethod
    def depth(cls, width: int) -> "CanonicalProjection":
        return cls("select", ((),) * width)

    def apply(self, blk: Block) -> tuple | None:
        if self.kind == "empty":
            return None
        return (blk.depth,) + tuple(tuple(p[i] for i in I) for p, I in zip(blk.parts, self.sets))

    @property
    def name(self) -> str:
        if self.kind == "empty":
            return "E_<>"
        if all(not I for I in self.sets):
            return "E_depth"
        return "E_(" + ";".join(",".join(map(str, I)) for I in self.sets) + ")"

    def to_json(self):
        return {"kind": self.kind, "index_sets": [list(I) for I in self.sets], "name": self.name}


def projections_at(seq: GeneratingSequence, k: int) -> list[CanonicalProjection]:
    """The family of canonical relations available at block position ``k``."""
    per = [index_sets(seq.structure(k, j).size) for j in range(seq.width(k))]
    return [CanonicalProjection.empty()] + [CanonicalProjection("select", t) for t in itertools.product(*per)]


@dataclass
class BlockCanonization:
    c: Approximation | None
    canonizations: list[tuple[CanonicalProjection, ...]]
    verified: bool
    candidates_checked: int

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "witness": None if self.c is None else approximation_to_json(self.c),
            "index_sets": [[p.to_json() for p in t] for t in self.canonizations],
            "verified": self.verified,
            "candidates_checked": self.candidates_checked,
        }


def block_key(projs: Sequence[CanonicalProjection], a: Approximation) -> tuple:
    return tuple(p.apply(blk) for p, blk in zip(projs, a))


def block_canonize(
    seq: GeneratingSequence,
    E: EquivalenceRelationTable,
    n: int,
    depth: int,
    q: int | None = None,
    budget: int = DEFAULT_PARTITION_BUDGET,
) -> BlockCanonization:
    """Find the first ``C`` in ``AR_q`` of the depth prefix on which ``E`` is canonical.

    ``E`` lives on ``AR_n`` of the prefix.  All tuples ``(E_i)`` that reproduce
    ``E`` on ``AR_n | C`` are returned; none is singled out as maximal.
    A result with ``c = None`` means nothing was found within the prefix.
    """
    q = n + 1 if q is None else q
    if q < n:
        raise ValidationError("need q >= n")
    dom = enumerate_AR_n(seq, depth, n, budget)
    if set(E.domain) != set(dom):
        raise ValidationError(f"relation must cover AR_{n} of the depth-{depth} prefix")
    families = list(itertools.product(*[projections_at(seq, i) for i in range(n)]))
    hosts = enumerate_AR_n(seq, depth, q, budget)
    if len(hosts) * len(families) > budget:
        raise ResourceError("block canonization candidate count exceeds budget",
                            cost=len(hosts) * len(families), budget=budget)
    for checked, c in enumerate(hosts, 1):
        elems = [a for a in sub_approximations(seq, c) if len(a) == n]
        found = [t for t in families if same_partition(elems, E.class_of, lambda a, t=t: block_key(t, a))]
        if found:
            ok = all(
                pairwise_agree(elems, E.related, lambda x, y, t=t: block_key(t, x) == block_key(t, y))
                for t in found
            )
            if not ok:  # pragma: no cover
                raise AssertionError("canonization failed re-verification")
            return BlockCanonization(c, found, ok, checked)
    return BlockCanonization(None, [], False, len(hosts))


# -- fronts and inner maps ----------------------------------------------------

@dataclass
class FrontReport:
    ok: bool
    antichain: bool
    coverage: bool
    mode: str
    witness: dict | None = None
    note: str = FRONT_NOTE

    def to_dict(self) -> dict:
        return {"schema": 1, "pass": self.ok, "mode": self.mode, "antichain": self.antichain,
                "coverage": self.coverage, "witness": self.witness, "note": self.note}


def _proper_prefix(a, b) -> bool:
    return len(a) < len(b) and tuple(b[: len(a)]) == tuple(a)


def validate_front(F: Sequence[Approximation], seq: GeneratingSequence, depth: int, mode: str = "nash-williams",
                   budget: int = DEFAULT_PARTITION_BUDGET) -> FrontReport:
    """Antichain check (``⊏`` or ``<=_fin``) plus finite-surrogate coverage."""
    mode = mode.lower().replace("_", "-")
    if mode not in ("nash-williams", "sperner"):
        raise ValidationError("mode must be nash-williams or sperner")
    F = [tuple(a) for a in F]
    for a in F:
        if not is_approximation(seq, a) or any(b.depth >= depth for b in a):
            raise ValidationError(f"{approximation_to_json(a)} is not an approximation of the depth-{depth} prefix")
    members = set(F)
    for a, b in itertools.permutations(sorted(members), 2):
        bad = _proper_prefix(a, b) if mode == "nash-williams" else le_fin(a, b)
        if bad:
            return FrontReport(False, False, False, mode, {"a": approximation_to_json(a), "b": approximation_to_json(b)})
    L = max((len(a) for a in F), default=0)
    for path in enumerate_AR_n(seq, depth, L, budget):
        if not any(path[:i] in members for i in range(L + 1)):
            return FrontReport(False, True, False, mode, {"uncovered": approximation_to_json(path)})
    return FrontReport(True, True, True, mode)


@dataclass(frozen=True)
class InnerMap:
    """One projection per block position for every front element."""

    choice: dict

    def image(self, b: Approximation) -> tuple:
        return tuple(x for x in block_key(self.choice[b], b) if x is not None)


@dataclass
class InnerReport:
    ok: bool
    inner: bool
    nash_williams: bool
    witness: dict | None = None

    def to_dict(self) -> dict:
        return {"schema": 1, "pass": self.ok, "inner": self.inner, "nash_williams": self.nash_williams,
                "witness": self.witness}


def validate_inner_nw(phi: InnerMap, F: Sequence[Approximation], seq: GeneratingSequence) -> InnerReport:
    F = [tuple(b) for b in F]
    for b in F:
        projs = phi.choice.get(b)
        if projs is None or len(projs) != len(b):
            return InnerReport(False, False, False, {"b": approximation_to_json(b), "reason": "needs one projection per block"})
        for i, p in enumerate(projs):
            if p.kind == "select":
                try:
                    IndexSelection(p.sets).validate([seq.structure(i, j).size for j in range(seq.width(i))])
                except ValidationError as exc:
                    return InnerReport(False, False, False, {"b": approximation_to_json(b), "reason": str(exc)})
    # the projection at position i may depend on r_i(b) only
    for b, c in itertools.combinations(F, 2):
        for i in range(min(len(b), len(c))):
            if b[:i] == c[:i] and phi.choice[b][i] != phi.choice[c][i]:
                return InnerReport(False, False, False, {"b": approximation_to_json(b), "c": approximation_to_json(c),
                                                         "position": i, "reason": "projection depends on more than r_i"})
            if b[i] != c[i]:
                break
    for b, c in itertools.permutations(F, 2):
        pb, pc = phi.image(b), phi.image(c)
        if pb != pc and _proper_prefix(pc, pb):
            return InnerReport(False, True, False, {"b": approximation_to_json(b), "c": approximation_to_json(c),
                                                    "phi_b": [list(x) for x in pb], "phi_c": [list(x) for x in pc]})
    return InnerReport(True, True, True)


# -- partition files ----------------------------------------------------------

def format_element(x) -> str:
    """Canonical text for an n-subset, a copy tuple, or an approximation."""
    if isinstance(x, tuple) and x and isinstance(x[0], Block):
        return ";".join(f"{b.depth}@" + "/".join(",".join(map(str, p)) or "-" for p in b.parts) for b in x)
    if isinstance(x, tuple) and x and isinstance(x[0], tuple):
        return "/".join(",".join(map(str, p)) or "-" for p in x)
    return ",".join(map(str, x)) or "-"


def format_partition(E: EquivalenceRelationTable) -> str:
    return "".join(" ".join(format_element(x) for x in cls) + "\n" for cls in E.classes())


def parse_partition(text: str, domain: Sequence) -> EquivalenceRelationTable:
    """Read one class per line; elements in :func:`format_element` form."""
    lookup = {format_element(x): x for x in domain}
    classes = []
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        cls = []
        for tok in ln.split():
            if tok not in lookup:
                raise ValidationError(f"unknown element {tok!r}")
            cls.append(lookup[tok])
        classes.append(cls)
    return EquivalenceRelationTable.from_classes(domain, classes)


def parse_approximation(text: str) -> Approximation:
    """Inverse of :func:`format_element` for approximations: ``d@0,1/2;d@...``."""
    text = text.strip()
    if not text:
        return ()
    blocks = []
    for part in text.split(";"):
        try:
            d, coords = part.split("@")
            blocks.append(Block(int(d), tuple(
                () if c in ("", "-") else tuple(int(i) for i in c.split(",")) for c in coords.split("/")
            )))
        except ValueError as exc:
            raise ValidationError(f"bad approximation {text!r}") from exc
    return tuple(blocks)
