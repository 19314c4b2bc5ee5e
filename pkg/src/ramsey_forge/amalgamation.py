"""Free, strong and order-prescribed free amalgamation, and an OPFAP checker.

An order prescription ``rho`` is a ``K x L`` grid over ``{'<', '=', '>'}``
saying how the ``k``-th point of ``X`` sits relative to the ``l``-th point of
``Y`` in the amalgam.  A free amalgam adds no relation tuples beyond the
images of the tables of ``X`` and ``Y``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import ResourceError, ValidationError
from .fraisse import DEFAULT_MEMBER_BUDGET, FraisseClass, contains, enumerate_members
from .structures import (
    Embedding,
    OrderedStructure,
    check_same_signature,
    format_structure,
    is_embedding,
    iter_copies,
    iter_merges,
    merge_positions,
    restrict,
)

SYMBOLS = ("<", "=", ">")


@dataclass(frozen=True)
class AmalgamationProblem:
    z: OrderedStructure
    x: OrderedStructure
    y: OrderedStructure
    e: Embedding
    f: Embedding

    def __post_init__(self):
        check_same_signature(self.z, self.x)
        check_same_signature(self.z, self.y)
        if not is_embedding(self.e, self.z, self.x):
            raise ValidationError(f"e={self.e.map} is not an embedding of Z into X")
        if not is_embedding(self.f, self.z, self.y):
            raise ValidationError(f"f={self.f.map} is not an embedding of Z into Y")

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        """Index pairs ``(k'_m, l'_m)`` of the shared points."""
        return tuple(zip(self.e.map, self.f.map))


Prescription = tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class AmalgamResult:
    w: OrderedStructure
    g: Embedding
    h: Embedding
    sigma: tuple[int, ...]


def parse_prescription(text: str) -> Prescription:
    rows = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    grid = tuple(tuple(ch for ch in row if not ch.isspace()) for row in rows)
    if any(ch not in SYMBOLS for row in grid for ch in row):
        raise ValidationError("prescription grid may only contain '<', '=', '>'")
    if len({len(r) for r in grid}) > 1:
        raise ValidationError("prescription grid rows differ in length")
    return grid


def format_prescription(rho: Prescription) -> str:
    return "\n".join("".join(row) for row in rho) + "\n"


def validate_prescription(p: AmalgamationProblem, rho: Prescription) -> tuple[bool, str | None]:
    """Check a prescription against the four OPFAP clauses.

    Returns ``(True, None)`` or ``(False, clause)``.  Clause (c) is read as
    "``=`` only on the shared pairs" and clause (d) with non-strict index
    bounds, which together make every valid grid realizable by a merge.
    """
    K, L = p.x.size, p.y.size
    if len(rho) != K or any(len(row) != L for row in rho):
        return False, "shape"
    pairs = p.pairs
    for k, l in pairs:
        if rho[k][l] != "=":
            return False, "a"
    for k0, l0 in pairs:
        for k in range(K):
            for l in range(L):
                if k < k0 and l > l0 and rho[k][l] != "<":
                    return False, "b"
                if k > k0 and l < l0 and rho[k][l] != ">":
                    return False, "b"
    shared = set(pairs)
    for k in range(K):
        for l in range(L):
            if rho[k][l] == "=" and (k, l) not in shared:
                return False, "c"
    for k in range(K):
        for l in range(L):
            r = rho[k][l]
            if r == "=":
                continue
            for k2 in range(K):
                for l2 in range(L):
                    if r == "<" and k2 <= k and l2 >= l and rho[k2][l2] != "<":
                        return False, "d"
                    if r == ">" and k2 >= k and l2 <= l and rho[k2][l2] != ">":
                        return False, "d"
    return True, None


def prescription_from_merge(merge, K: int, L: int) -> Prescription:
    sx, sy = merge_positions(merge, K, L)
    return tuple(
        tuple("<" if sx[k] < sy[l] else "=" if sx[k] == sy[l] else ">" for l in range(L))
        for k in range(K)
    )


def iter_prescriptions(p: AmalgamationProblem):
    """All valid prescriptions, one per strong merge of the two universes."""
    for merge in iter_merges(p.x.size, p.y.size, p.pairs):
        yield prescription_from_merge(merge, p.x.size, p.y.size)


def free_amalgamate(p: AmalgamationProblem, rho: Prescription) -> AmalgamResult:
    ok, clause = validate_prescription(p, rho)
    if not ok:
        raise ValidationError(f"order prescription violates clause ({clause})", clause=clause)
    K, L = p.x.size, p.y.size
    # x_k goes before y_l exactly when rho says '<'; shared pairs merge.
    merge = []
    i = j = 0
    while i < K or j < L:
        if i < K and j < L:
            r = rho[i][j]
            if r == "=":
                merge.append(("=", i, j))
                i, j = i + 1, j + 1
            elif r == "<":
                merge.append(("x", i, -1))
                i += 1
            else:
                merge.append(("y", -1, j))
                j += 1
        elif i < K:
            merge.append(("x", i, -1))
            i += 1
        else:
            merge.append(("y", -1, j))
            j += 1
    sx, sy = merge_positions(merge, K, L)
    tables = {}
    for name, tx, ty in zip(p.x.signature.names, p.x.tables, p.y.tables):
        tables[name] = [tuple(sx[a] for a in t) for t in tx] + [tuple(sy[b] for b in t) for t in ty]
    w = OrderedStructure.build(p.x.signature, len(merge), tables)
    result = AmalgamResult(w, Embedding(tuple(sx)), Embedding(tuple(sy)), tuple(sx) + tuple(sy))
    bad = conclusion_violations(p, rho, result)
    if bad:
        raise ValidationError(f"prescription is not realizable: conclusions {bad} fail", clause="d")
    return result


def default_prescription(p: AmalgamationProblem) -> Prescription:
    """The merge that places X-points first wherever the shared points allow."""
    K, L = p.x.size, p.y.size
    best = min(
        iter_merges(K, L, p.pairs),
        key=lambda m: tuple(0 if kind in ("x", "=") else 1 for kind, _, _ in m),
    )
    return prescription_from_merge(best, K, L)


def strong_amalgamate(p: AmalgamationProblem) -> AmalgamResult:
    """Shared points identified, remaining X-points before remaining Y-points."""
    return free_amalgamate(p, default_prescription(p))


def conclusion_violations(p: AmalgamationProblem, rho: Prescription, r: AmalgamResult) -> list[str]:
    """Return the list of failed amalgam conclusions (1)-(4), plus freeness."""
    K, L = p.x.size, p.y.size
    sigma = r.sigma
    bad = []
    sx, sy = sigma[:K], sigma[K:]
    if any(a >= b for a, b in zip(sx, sx[1:])) or any(a >= b for a, b in zip(sy, sy[1:])):
        bad.append("1")
    if restrict(r.w, sx) != p.x or restrict(r.w, sy) != p.y:
        bad.append("2")
    shared_x = [sigma[k] for k, _ in p.pairs]
    shared_y = [sigma[K + l] for _, l in p.pairs]
    if shared_x != shared_y or restrict(r.w, shared_x) != p.z:
        bad.append("3")
    if r.g.compose(p.e).map != r.h.compose(p.f).map:
        bad.append("3")
    for k in range(K):
        for l in range(L):
            a, b = sigma[k], sigma[K + l]
            actual = "<" if a < b else "=" if a == b else ">"
            if actual != rho[k][l]:
                bad.append("4")
                break
        else:
            continue
        break
    if set(sx) & set(sy) != set(shared_x):
        bad.append("strong")
    gx, gy = set(sx), set(sy)
    for table in r.w.tables:
        for t in table:
            if not (set(t) <= gx or set(t) <= gy):
                bad.append("free")
                break
    return sorted(set(bad))


@dataclass
class OpfapReport:
    cls: str
    size_cap: int
    passed: bool = True
    problems: int = 0
    prescriptions: int = 0
    conclusion_failures: int = 0
    witness: dict | None = None
    counts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "class": self.cls,
            "size_cap": self.size_cap,
            "pass": self.passed,
            "problems": self.problems,
            "prescriptions": self.prescriptions,
            "conclusion_failures": self.conclusion_failures,
            "witness": self.witness,
        }


def verify_opfap(cls: FraisseClass, size_cap: int = 4, budget: int = DEFAULT_MEMBER_BUDGET) -> OpfapReport:
    """Check that every order-prescribed free amalgam stays in ``cls``.

    Triples are visited in a fixed order (Z, X, Y by size then enumeration
    order, embeddings lexicographic, prescriptions in merge order) and the
    first failing one is reported.
    """
    report = OpfapReport(cls.name, size_cap)
    members = [m for s in range(size_cap + 1) for m in enumerate_members(cls, s, budget)]
    for z, x, y in itertools.product(members, repeat=3):
        if z.size > min(x.size, y.size):
            continue
        for e in iter_copies(z, x):
            for f in iter_copies(z, y):
                prob = AmalgamationProblem(z, x, y, Embedding(e), Embedding(f))
                report.problems += 1
                for rho in iter_prescriptions(prob):
                    report.prescriptions += 1
                    if report.prescriptions > budget:
                        raise ResourceError("OPFAP check exceeded its budget", cost=report.prescriptions, budget=budget)
                    res = free_amalgamate(prob, rho)
                    if conclusion_violations(prob, rho, res):
                        report.conclusion_failures += 1
                    if not contains(cls, res.w):
                        report.passed = False
                        report.witness = {
                            "z": format_structure(z), "x": format_structure(x), "y": format_structure(y),
                            "e": list(e), "f": list(f), "rho": format_prescription(rho),
                            "w": format_structure(res.w),
                        }
                        return report
    report.passed = report.conclusion_failures == 0
    return report
