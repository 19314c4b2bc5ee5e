"""Fraïssé classes of finite ordered structures: membership, enumeration, counts.

Because the order is part of every structure, isomorphism classes of size
``s`` are the same as distinct labeled structures on ``{0..s-1}``; enumeration
is labeled enumeration filtered by the membership predicate.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .errors import DomainError, ResourceError, ValidationError
from .structures import (
    EMPTY_SIGNATURE,
    GRAPH_SIGNATURE,
    OrderedStructure,
    Signature,
    embeds,
    is_graph,
    iter_copies,
    iter_merges,
    merge_positions,
    parse_structures,
    restrict,
)

DEFAULT_MEMBER_BUDGET = 2**24

KINDS = ("linear-orders", "ordered-graphs", "clique-free", "complete-graphs", "forbidden")


@dataclass(frozen=True)
class FraisseClass:
    """A named, checkable class of finite ordered structures.

    ``param`` is the forbidden clique size for ``clique-free`` (3 means
    triangle-free).  ``forbidden`` holds the excluded structures of a
    ``forbidden`` class; ``ambient`` says whether its members must be graphs
    or may be arbitrary relational structures over the signature.
    """

    name: str
    kind: str
    param: int | None = None
    forbidden: tuple[OrderedStructure, ...] = ()
    ambient: str = "graph"
    signature: Signature = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown class kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "clique-free" and (self.param is None or self.param < 3):
            raise ValidationError("clique-free classes need param >= 3")
        if self.kind == "forbidden":
            if not self.forbidden:
                raise ValidationError("a forbidden-substructure class needs at least one forbidden structure")
            sigs = {f.signature for f in self.forbidden}
            if len(sigs) != 1:
                raise ValidationError("forbidden structures must share one signature")
            sig = sigs.pop()
            if self.ambient not in ("graph", "relational"):
                raise ValidationError(f"ambient must be 'graph' or 'relational', got {self.ambient!r}")
            if self.ambient == "graph" and sig != GRAPH_SIGNATURE:
                raise ValidationError("graph ambient requires the signature E/2")
        elif self.kind == "linear-orders":
            sig = EMPTY_SIGNATURE
        else:
            sig = GRAPH_SIGNATURE
        object.__setattr__(self, "signature", sig)

    @property
    def graph_like(self) -> bool:
        return self.kind in ("ordered-graphs", "clique-free", "complete-graphs") or (
            self.kind == "forbidden" and self.ambient == "graph"
        )

    def describe(self) -> dict:
        d = {"name": self.name, "kind": self.kind}
        if self.param is not None:
            d["param"] = self.param
        if self.forbidden:
            from .structures import format_structure

            d["forbidden"] = [format_structure(f) for f in self.forbidden]
            d["ambient"] = self.ambient
        return d


LINEAR_ORDERS = FraisseClass("linear-orders", "linear-orders")
ORDERED_GRAPHS = FraisseClass("ordered-graphs", "ordered-graphs")
COMPLETE_GRAPHS = FraisseClass("complete-graphs", "complete-graphs")


def clique_free(n: int) -> FraisseClass:
    return FraisseClass(f"clique-free-{n}", "clique-free", param=n)


TRIANGLE_FREE = clique_free(3)


def forbidden_class(name: str, forbidden, ambient: str | None = None) -> FraisseClass:
    forbidden = tuple(forbidden)
    if ambient is None:
        ambient = "graph" if all(is_graph(f) for f in forbidden) else "relational"
    return FraisseClass(name, "forbidden", forbidden=forbidden, ambient=ambient)


def _has_clique(s: OrderedStructure, n: int) -> bool:
    adj = {v: set() for v in range(s.size)}
    for u, v in s.table("E"):
        adj[u].add(v)

    def grow(clique: list[int], cands: set[int]) -> bool:
        if len(clique) == n:
            return True
        for v in sorted(cands):
            if grow(clique + [v], {w for w in cands & adj[v] if w > v}):
                return True
        return False

    return grow([], set(range(s.size)))


def contains(cls: FraisseClass, s: OrderedStructure) -> bool:
    if s.signature != cls.signature:
        raise DomainError(f"structure signature {s.signature.relations} does not match class {cls.name}")
    if cls.kind == "linear-orders":
        return True
    if cls.graph_like and not is_graph(s):
        return False
    if cls.kind == "ordered-graphs":
        return True
    if cls.kind == "clique-free":
        return not _has_clique(s, cls.param)
    if cls.kind == "complete-graphs":
        return len(s.table("E")) == s.size * (s.size - 1)
    return not any(embeds(f, s) for f in cls.forbidden)


def _extension_patterns(cls: FraisseClass, size: int):
    """Relation tuples that may involve the new last point of a ``size``-point structure.

    Yields dicts ``{relation: [tuples through size-1]}``.
    """
    p = size - 1
    if cls.kind == "linear-orders":
        yield {}
        return
    if cls.kind == "complete-graphs":
        yield {"E": [t for u in range(p) for t in ((u, p), (p, u))]}
        return
    if cls.graph_like:
        for bits in range(1 << p):
            nbrs = [u for u in range(p) if bits >> (p - 1 - u) & 1]
            yield {"E": [t for u in nbrs for t in ((u, p), (p, u))]}
        return
    slots = []
    for name, arity in cls.signature.relations:
        for t in itertools.product(range(size), repeat=arity):
            if p in t:
                slots.append((name, t))
    for bits in range(1 << len(slots)):
        pat: dict[str, list] = {}
        for i, (name, t) in enumerate(slots):
            if bits >> (len(slots) - 1 - i) & 1:
                pat.setdefault(name, []).append(t)
        yield pat


def _survives(cls: FraisseClass, s: OrderedStructure) -> bool:
    """Membership test for an extension whose first ``size-1`` points form a member.

    Only substructures through the new point can violate the class.
    """
    p = s.size - 1
    if cls.kind == "clique-free":
        nbrs = [u for u, v in s.table("E") if v == p]
        return not nbrs or not _has_clique(restrict(s, nbrs), cls.param - 1)
    if cls.kind == "forbidden":
        for f in cls.forbidden:
            for c in iter_copies(f, s):
                if c and c[-1] == p:
                    return False
        return True
    return contains(cls, s)


@lru_cache(maxsize=256)
def _members(cls: FraisseClass, size: int, budget: int) -> tuple[OrderedStructure, ...]:
    if size == 0:
        return (OrderedStructure.build(cls.signature, 0),)
    parents = _members(cls, size - 1, budget)
    out = []
    examined = 0
    for parent in parents:
        for pat in _extension_patterns(cls, size):
            examined += 1
            if examined > budget:
                raise ResourceError(
                    f"enumerating {cls.name} members of size {size} examined more than {budget} candidates",
                    cost=examined,
                    budget=budget,
                )
            tables = {name: list(t) + pat.get(name, []) for name, t in zip(cls.signature.names, parent.tables)}
            cand = OrderedStructure.build(cls.signature, size, tables)
            if _survives(cls, cand):
                out.append(cand)
    out.sort(key=lambda s: s.tables)
    return tuple(out)


def enumerate_members(cls: FraisseClass, size: int, budget: int = DEFAULT_MEMBER_BUDGET) -> list[OrderedStructure]:
    """All members of ``cls`` of the given size, each once, ordered by relation tables."""
    if size < 0:
        raise DomainError("size must be non-negative")
    return list(_members(cls, size, budget))


@dataclass(frozen=True)
class IsoCountRecord:
    cls: FraisseClass
    size: int
    count: int
    method: str

    def row(self) -> dict:
        return {"class": self.cls.name, "size": self.size, "count": self.count}


def closed_form_count(cls: FraisseClass, size: int) -> int | None:
    if cls.kind in ("linear-orders", "complete-graphs"):
        return 1
    if cls.kind == "ordered-graphs":
        return 2 ** (size * (size - 1) // 2)
    return None


def iso_count(cls: FraisseClass, size: int, budget: int = DEFAULT_MEMBER_BUDGET) -> IsoCountRecord:
    closed = closed_form_count(cls, size)
    if closed is not None:
        return IsoCountRecord(cls, size, closed, "closed-form")
    return IsoCountRecord(cls, size, len(enumerate_members(cls, size, budget)), "enumeration")


# -- class axioms -------------------------------------------------------------

@dataclass
class AxiomReport:
    cls: str
    size_cap: int
    heredity: bool = True
    jep: bool = True
    ap: bool = True
    checked: dict = field(default_factory=dict)
    witness: dict | None = None

    @property
    def passed(self) -> bool:
        return self.heredity and self.jep and self.ap

    def to_dict(self) -> dict:
        return {
            "class": self.cls,
            "size_cap": self.size_cap,
            "pass": self.passed,
            "heredity": self.heredity,
            "jep": self.jep,
            "ap": self.ap,
            "checked": self.checked,
            "witness": self.witness,
        }


def _cross_slots(cls: FraisseClass, sx: list[int], sy: list[int], size: int):
    gx, gy = set(sx), set(sy)
    slots = []
    if cls.graph_like:
        for u, v in itertools.combinations(range(size), 2):
            if not ({u, v} <= gx or {u, v} <= gy):
                slots.append(("E", ((u, v), (v, u))))
        return slots
    for name, arity in cls.signature.relations:
        for t in itertools.product(range(size), repeat=arity):
            if not (set(t) <= gx or set(t) <= gy):
                slots.append((name, (t,)))
    return slots


def find_amalgam(cls: FraisseClass, x, y, pairs, budget: int = 2**20):
    """Search for some amalgam of ``x`` and ``y`` over the identified ``pairs``.

    Every amalgam restricts, on the union of the two images, to a merge of the
    universes (possibly identifying more points) plus some relations across;
    by heredity it is enough to search those.  Returns ``(w, sx, sy)`` or None.
    """
    spent = 0
    for merge in iter_merges(x.size, y.size, pairs, extra=True):
        sx, sy = merge_positions(merge, x.size, y.size)
        size = len(merge)
        base = {name: set() for name in cls.signature.names}
        for name, tx, ty in zip(cls.signature.names, x.tables, y.tables):
            base[name] |= {tuple(sx[i] for i in t) for t in tx}
            base[name] |= {tuple(sy[i] for i in t) for t in ty}
        w0 = OrderedStructure.build(cls.signature, size, base)
        if restrict(w0, sx) != x or restrict(w0, sy) != y:
            continue
        slots = _cross_slots(cls, sx, sy, size)
        for bits in range(1 << len(slots)):
            spent += 1
            if spent > budget:
                raise ResourceError("amalgam search exceeded its budget", cost=spent, budget=budget)
            tables = {name: set(t) for name, t in base.items()}
            for i, (name, ts) in enumerate(slots):
                if bits >> i & 1:
                    tables[name].update(ts)
            w = OrderedStructure.build(cls.signature, size, tables)
            if contains(cls, w):
                return w, sx, sy
    return None


def check_class_axioms(cls: FraisseClass, size_cap: int = 5, budget: int = DEFAULT_MEMBER_BUDGET) -> AxiomReport:
    """Exhaustively check heredity, JEP and AP for members up to ``size_cap``."""
    report = AxiomReport(cls.name, size_cap)
    members = [m for s in range(size_cap + 1) for m in enumerate_members(cls, s, budget)]
    n_restrictions = 0
    for m in members:
        for r in range(m.size):
            for idx in itertools.combinations(range(m.size), r):
                n_restrictions += 1
                if not contains(cls, restrict(m, idx)):
                    report.heredity = False
                    report.witness = {"axiom": "heredity", "member": repr(m), "subset": list(idx)}
                    return report
    report.checked["restrictions"] = n_restrictions
    empty = OrderedStructure.build(cls.signature, 0)
    n_jep = 0
    for x in members:
        for y in members:
            n_jep += 1
            if find_amalgam(cls, x, y, (), budget) is None:
                report.jep = False
                report.witness = {"axiom": "jep", "x": repr(x), "y": repr(y)}
                return report
    report.checked["jep_pairs"] = n_jep
    n_ap = 0
    for z in members:
        if z == empty:
            continue
        for x in members:
            for e in iter_copies(z, x):
                for y in members:
                    for f in iter_copies(z, y):
                        n_ap += 1
                        if find_amalgam(cls, x, y, tuple(zip(e, f)), budget) is None:
                            report.ap = False
                            report.witness = {"axiom": "ap", "z": repr(z), "x": repr(x), "y": repr(y),
                                              "e": list(e), "f": list(f)}
                            return report
    report.checked["ap_problems"] = n_ap
    return report


# -- class spec text form -----------------------------------------------------

_KIND_ALIASES = {
    "linear-orders": "linear-orders", "LinearOrders": "linear-orders",
    "ordered-graphs": "ordered-graphs", "OrderedGraphs": "ordered-graphs",
    "clique-free": "clique-free", "OrderedCliqueFree": "clique-free",
    "complete-graphs": "complete-graphs", "OrderedCompleteGraphs": "complete-graphs",
    "forbidden": "forbidden", "ForbiddenSubstructures": "forbidden",
}


def parse_class_spec(line: str, base_dir: Path | None = None) -> FraisseClass:
    """Parse ``class <name> kind=<kind> [param=<n>] [forbidden=<file>,...] [ambient=...]``."""
    toks = line.split()
    if len(toks) < 3 or toks[0] != "class":
        raise ValidationError(f"bad class spec {line!r}")
    name = toks[1]
    opts = {}
    for tok in toks[2:]:
        if "=" not in tok:
            raise ValidationError(f"bad class spec token {tok!r}")
        k, v = tok.split("=", 1)
        opts[k] = v
    kind = _KIND_ALIASES.get(opts.pop("kind", ""), None)
    if kind is None:
        raise ValidationError(f"class spec {line!r} needs a known kind")
    param = int(opts.pop("param")) if "param" in opts else None
    forbidden = []
    for fn in filter(None, opts.pop("forbidden", "").split(",")):
        path = Path(fn) if base_dir is None else Path(base_dir) / fn
        forbidden.extend(parse_structures(path.read_text()))
    ambient = opts.pop("ambient", None)
    if opts:
        raise ValidationError(f"unknown class spec options {sorted(opts)}")
    if kind == "forbidden":
        return forbidden_class(name, forbidden, ambient)
    return FraisseClass(name, kind, param=param)



def class_by_name(name: str) -> FraisseClass:
    """Built-in classes by short name: ``linear-orders``, ``ordered-graphs``,
    ``complete-graphs``, ``clique-free-<n>`` (also ``triangle-free``)."""
    if name in ("linear-orders", "H", "LinearOrders"):
        return LINEAR_ORDERS
    if name in ("ordered-graphs", "OrderedGraphs"):
        return ORDERED_GRAPHS
    if name in ("complete-graphs", "OrderedCompleteGraphs"):
        return COMPLETE_GRAPHS
    if name in ("triangle-free", "A2"):
        return TRIANGLE_FREE
    m = re.fullmatch(r"clique-free-(\d+)", name)
    if m:
        return clique_free(int(m.group(1)))
    raise ValidationError(f"unknown built-in class {name!r}")

