"""Finite ordered relational structures.

A structure lives on the universe ``{0, ..., size-1}`` ordered naturally, so
an ordered isomorphism between two structures of the same size is forced to be
the identity.  Equality of :class:`OrderedStructure` values is therefore the
same thing as ordered isomorphism, and copies of ``a`` inside ``b`` are just
index subsets of ``b`` whose induced substructure equals ``a``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import DomainError, NotFoundError, ValidationError

Tuple_ = tuple[int, ...]


@dataclass(frozen=True, order=True)
class Signature:
    """Relation symbols with arities; the order ``<`` is implicit."""

    relations: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        names = [name for name, _ in self.relations]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate relation symbol in {names}")
        for name, arity in self.relations:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
                raise ValidationError(f"bad relation symbol {name!r}")
            if arity < 1:
                raise ValidationError(f"relation {name} has arity {arity} < 1")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.relations)

    def arity(self, name: str) -> int:
        for n, a in self.relations:
            if n == name:
                return a
        raise DomainError(f"no relation {name!r} in signature")


EMPTY_SIGNATURE = Signature()
GRAPH_SIGNATURE = Signature((("E", 2),))


@dataclass(frozen=True, order=True)
class OrderedStructure:
    """An ordered relational structure on ``{0..size-1}``.

    ``tables`` holds one sorted tuple of index tuples per relation, in the
    signature's order.  Construct through :meth:`build` to get normalization.
    """

    signature: Signature
    size: int
    tables: tuple[tuple[Tuple_, ...], ...]

    def __post_init__(self):
        if self.size < 0:
            raise ValidationError("size must be non-negative")
        if len(self.tables) != len(self.signature.relations):
            raise ValidationError("one table per relation symbol is required")
        for (name, arity), table in zip(self.signature.relations, self.tables):
            for t in table:
                if len(t) != arity:
                    raise ValidationError(f"tuple {t} in {name} has wrong arity")
                if any(i < 0 or i >= self.size for i in t):
                    raise ValidationError(f"tuple {t} in {name} leaves the universe of size {self.size}")
            if list(table) != sorted(set(table)):
                raise ValidationError(f"table {name} is not sorted and duplicate-free")

    @classmethod
    def build(cls, signature: Signature, size: int, tables: dict[str, Iterable[Sequence[int]]] | None = None):
        tables = tables or {}
        unknown = set(tables) - set(signature.names)
        if unknown:
            raise ValidationError(f"relations {sorted(unknown)} not in signature")
        norm = tuple(
            tuple(sorted({tuple(int(i) for i in t) for t in tables.get(name, ())}))
            for name in signature.names
        )
        return cls(signature, size, norm)

    def table(self, name: str) -> tuple[Tuple_, ...]:
        return self.tables[self.signature.names.index(name)]

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        rels = ", ".join(f"{n}={list(t)}" for n, t in zip(self.signature.names, self.tables))
        return f"OrderedStructure(size={self.size}{', ' if rels else ''}{rels})"


def linear_order(n: int) -> OrderedStructure:
    return OrderedStructure.build(EMPTY_SIGNATURE, n)


def graph(n: int, edges: Iterable[Sequence[int]] = ()) -> OrderedStructure:
    """Ordered graph with a symmetric irreflexive edge relation ``E``."""
    sym = set()
    for u, v in edges:
        if u == v:
            raise ValidationError(f"loop at {u}")
        sym.add((u, v))
        sym.add((v, u))
    return OrderedStructure.build(GRAPH_SIGNATURE, n, {"E": sym})


def graph_edges(s: OrderedStructure) -> list[tuple[int, int]]:
    return [t for t in s.table("E") if t[0] < t[1]]


def is_graph(s: OrderedStructure) -> bool:
    if s.signature != GRAPH_SIGNATURE:
        return False
    table = set(s.table("E"))
    return all(u != v and (v, u) in table for u, v in table)


@dataclass(frozen=True)
class Embedding:
    """A strictly increasing map from a source universe into a target universe."""

    map: tuple[int, ...]

    def __post_init__(self):
        if any(a >= b for a, b in zip(self.map, self.map[1:])):
            raise ValidationError(f"embedding {self.map} is not strictly increasing")

    def __call__(self, i: int) -> int:
        return self.map[i]

    def __len__(self) -> int:
        return len(self.map)

    def image(self) -> tuple[int, ...]:
        return self.map

    def compose(self, inner: "Embedding") -> "Embedding":
        """``self ∘ inner``: apply ``inner`` first."""
        return Embedding(tuple(self.map[i] for i in inner.map))


def check_same_signature(a: OrderedStructure, b: OrderedStructure) -> None:
    if a.signature != b.signature:
        raise DomainError(f"signature mismatch: {a.signature.relations} vs {b.signature.relations}")


def is_embedding(e: Embedding, source: OrderedStructure, target: OrderedStructure) -> bool:
    """Order preserving, and every relation both preserved and reflected."""
    check_same_signature(source, target)
    if len(e.map) != source.size or any(i < 0 or i >= target.size for i in e.map):
        return False
    return restrict(target, e.map) == source


def restrict(s: OrderedStructure, idx: Sequence[int]) -> OrderedStructure:
    """Induced substructure on ``idx``, relabeled to ``{0..len(idx)-1}``."""
    idx = list(idx)
    if any(a >= b for a, b in zip(idx, idx[1:])):
        raise DomainError(f"index set {idx} is not strictly increasing")
    if idx and (idx[0] < 0 or idx[-1] >= s.size):
        raise DomainError(f"index set {idx} out of range for size {s.size}")
    pos = {v: i for i, v in enumerate(idx)}
    tables = tuple(
        tuple(sorted(tuple(pos[i] for i in t) for t in table if all(i in pos for i in t)))
        for table in s.tables
    )
    return OrderedStructure(s.signature, len(idx), tables)


def _tuples_through(p: int, arity: int) -> Iterator[Tuple_]:
    """All tuples over ``{0..p}`` that mention ``p``."""
    for t in itertools.product(range(p + 1), repeat=arity):
        if p in t:
            yield t


def iter_copies(a: OrderedStructure, b: OrderedStructure) -> Iterator[Tuple_]:
    """Yield copies of ``a`` in ``b`` (as index tuples) in lexicographic order.

    Backtracking over increasing index choices; after placing the ``p``-th
    point, every tuple through position ``p`` is checked against ``b``.
    """
    check_same_signature(a, b)
    k, n = a.size, b.size
    if k > n:
        return
    a_sets = [set(t) for t in a.tables]
    b_sets = [set(t) for t in b.tables]
    arities = [ar for _, ar in a.signature.relations]
    checks = [
        [(r, t, t in a_sets[r]) for r, ar in enumerate(arities) for t in _tuples_through(p, ar)]
        for p in range(k)
    ]
    chosen: list[int] = []

    def extend(p: int, start: int) -> Iterator[Tuple_]:
        if p == k:
            yield tuple(chosen)
            return
        for v in range(start, n - (k - p) + 1):
            chosen.append(v)
            if all((tuple(chosen[i] for i in t) in b_sets[r]) == want for r, t, want in checks[p]):
                yield from extend(p + 1, v + 1)
            chosen.pop()

    yield from extend(0, 0)


@dataclass(frozen=True)
class CopySet:
    base: OrderedStructure
    pattern: OrderedStructure
    copies: tuple[Tuple_, ...]

    def __len__(self) -> int:
        return len(self.copies)

    def __iter__(self):
        return iter(self.copies)


def enumerate_copies(a: OrderedStructure, b: OrderedStructure) -> CopySet:
    """All index subsets of ``b`` inducing ``a``, lexicographically ordered."""
    return CopySet(b, a, tuple(iter_copies(a, b)))


def leftmost_copy(a: OrderedStructure, b: OrderedStructure) -> Embedding:
    for c in iter_copies(a, b):
        return Embedding(c)
    raise NotFoundError(f"{a!r} does not embed into {b!r}")


def embeds(a: OrderedStructure, b: OrderedStructure) -> bool:
    return next(iter_copies(a, b), None) is not None


def disjoint_sum(x: OrderedStructure, y: OrderedStructure, interleaving: Sequence[str] | None = None):
    """Place ``x`` and ``y`` side by side with no relations across.

    ``interleaving`` lists ``"x"``/``"y"`` labels, one per point of the result,
    giving the merged order.  The default puts all of ``x`` first.
    Returns ``(w, g, h)`` with ``g: x -> w`` and ``h: y -> w``.
    """
    check_same_signature(x, y)
    if interleaving is None:
        interleaving = ["x"] * x.size + ["y"] * y.size
    interleaving = list(interleaving)
    if (
        any(c not in ("x", "y") for c in interleaving)
        or interleaving.count("x") != x.size
        or interleaving.count("y") != y.size
    ):
        raise ValidationError(f"interleaving {''.join(interleaving)} does not merge sizes {x.size} and {y.size}")
    gx = [i for i, c in enumerate(interleaving) if c == "x"]
    gy = [i for i, c in enumerate(interleaving) if c == "y"]
    tables = {}
    for name, tx, ty in zip(x.signature.names, x.tables, y.tables):
        tables[name] = [tuple(gx[i] for i in t) for t in tx] + [tuple(gy[i] for i in t) for t in ty]
    w = OrderedStructure.build(x.signature, x.size + y.size, tables)
    return w, Embedding(tuple(gx)), Embedding(tuple(gy))


# -- canonical text format ---------------------------------------------------

def format_structure(s: OrderedStructure) -> str:
    lines = [f"size={s.size}"]
    for (name, arity), table in zip(s.signature.relations, s.tables):
        body = " ".join("(" + ",".join(str(i) for i in t) + ")" for t in table)
        lines.append(f"rel {name}/{arity}:" + (f" {body}" if body else ""))
    return "\n".join(lines) + "\n"


_REL_LINE = re.compile(r"^rel ([A-Za-z_][A-Za-z0-9_]*)/(\d+):(.*)$")
_TUPLE = re.compile(r"\(([0-9,]*)\)")


def parse_structure(text: str) -> OrderedStructure:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("size="):
        raise ValidationError("structure text must start with 'size=<n>'")
    try:
        size = int(lines[0][5:])
    except ValueError as exc:
        raise ValidationError(f"bad size line {lines[0]!r}") from exc
    rels, tables = [], {}
    for ln in lines[1:]:
        m = _REL_LINE.match(ln)
        if not m:
            raise ValidationError(f"bad relation line {ln!r}")
        name, arity, rest = m.group(1), int(m.group(2)), m.group(3)
        tuples = [tuple(int(v) for v in g.split(",")) for g in _TUPLE.findall(rest)]
        if _TUPLE.sub("", rest).strip():
            raise ValidationError(f"junk in relation line {ln!r}")
        rels.append((name, arity))
        tables[name] = tuples
    return OrderedStructure.build(Signature(tuple(rels)), size, tables)


def parse_structures(text: str) -> list[OrderedStructure]:
    """Several structures in one text, each starting at its ``size=`` line."""
    chunks, cur = [], []
    for ln in text.splitlines():
        if ln.strip().startswith("size=") and cur:
            chunks.append("\n".join(cur))
            cur = []
        if ln.strip() and not ln.strip().startswith("#"):
            cur.append(ln)
    if cur:
        chunks.append("\n".join(cur))
    return [parse_structure(c) for c in chunks]


# -- merges of two ordered universes ----------------------------------------

Merge = tuple[tuple[str, int, int], ...]


def iter_merges(k: int, l: int, pairs: Sequence[tuple[int, int]] = (), extra: bool = False) -> Iterator[Merge]:
    """Enumerate order-respecting merges of ``{x_0..x_{k-1}}`` and ``{y_0..y_{l-1}}``.

    Each merge is a tuple of events ``("x", i, -1)``, ``("y", -1, j)`` or
    ``("=", i, j)`` in increasing order of the merged universe.  Every pair in
    ``pairs`` is identified; with ``extra`` further identifications of
    unpaired points are allowed as well (needed for general, non-strong
    amalgams).
    """
    px = {a: b for a, b in pairs}
    py = {b: a for a, b in pairs}
    out: list[tuple[str, int, int]] = []

    def rec(i: int, j: int) -> Iterator[Merge]:
        if i == k and j == l:
            yield tuple(out)
            return
        if i < k and px.get(i, -2) == j:
            out.append(("=", i, j))
            yield from rec(i + 1, j + 1)
            out.pop()
            return
        if i < k and i not in px:
            out.append(("x", i, -1))
            yield from rec(i + 1, j)
            out.pop()
        if j < l and j not in py:
            out.append(("y", -1, j))
            yield from rec(i, j + 1)
            out.pop()
        if extra and i < k and j < l and i not in px and j not in py:
            out.append(("=", i, j))
            yield from rec(i + 1, j + 1)
            out.pop()

    yield from rec(0, 0)


def merge_positions(merge: Merge, k: int, l: int) -> tuple[list[int], list[int]]:
    """Positions of the x-points and y-points in the merged universe."""
    sx, sy = [0] * k, [0] * l
    for pos, (kind, i, j) in enumerate(merge):
        if kind in ("x", "="):
            sx[i] = pos
        if kind in ("y", "="):
            sy[j] = pos
    return sx, sy
