"""Exhaustive partition-arrow checks for single classes and finite products.

``(C_j) -> (B_j)^(A_j)_k`` holds when every k-coloring of the product copy
set ``prod_j (C_j choose A_j)`` leaves some ``(B'_j)`` whose A-copies share one
color.  The check enumerates colorings as base-k counters over the
lexicographically ordered copy list; the inner loop lives in :mod:`kernels`.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ResourceError, ValidationError
from .fraisse import DEFAULT_MEMBER_BUDGET, FraisseClass, enumerate_members
from .structures import OrderedStructure, embeds, enumerate_copies, format_structure

DEFAULT_COLORING_BUDGET = 2**26


@dataclass(frozen=True)
class ArrowQuery:
    """Per-coordinate triples ``(A_j, B_j, C_j)`` and a number of colors."""

    coords: tuple[tuple[OrderedStructure, OrderedStructure, OrderedStructure], ...]
    k: int = 2

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("need at least one color")
        if not self.coords:
            raise ValidationError("need at least one coordinate")
        for j, (a, b, c) in enumerate(self.coords):
            if not embeds(a, b) or not embeds(b, c):
                raise ValidationError(f"coordinate {j}: the chain A <= B <= C does not hold")

    @classmethod
    def single(cls, a, b, c, k: int = 2) -> "ArrowQuery":
        return cls(((a, b, c),), k)

    def describe(self) -> dict:
        return {
            "k": self.k,
            "coords": [
                {"A": format_structure(a), "B": format_structure(b), "C": format_structure(c)}
                for a, b, c in self.coords
            ],
        }


def copy_families(q: ArrowQuery):
    """Index the product copy set and list the A-copies inside each ``(B'_j)``.

    Returns ``(copies, rows)``: ``copies`` is the lexicographic list of A-copy
    tuples in ``C``; ``rows[r]`` lists indices into it for the r-th B-copy.
    """
    a_in_c = [enumerate_copies(a, c).copies for a, b, c in q.coords]
    a_in_b = [enumerate_copies(a, b).copies for a, b, c in q.coords]
    b_in_c = [enumerate_copies(b, c).copies for a, b, c in q.coords]
    index = [{cp: i for i, cp in enumerate(cs)} for cs in a_in_c]
    radix = [len(cs) for cs in a_in_c]
    copies = list(itertools.product(*a_in_c))
    rows = []
    for bprime in itertools.product(*b_in_c):
        per_coord = [
            [index[j][tuple(bprime[j][i] for i in cp)] for cp in a_in_b[j]]
            for j in range(len(q.coords))
        ]
        row = []
        for combo in itertools.product(*per_coord):
            flat = 0
            for j, v in enumerate(combo):
                flat = flat * radix[j] + v
            row.append(flat)
        rows.append(row)
    return copies, rows


def arrow_cost(q: ArrowQuery) -> tuple[int, int]:
    n = math.prod(len(enumerate_copies(a, c)) for a, b, c in q.coords)
    return n, q.k**n


def arrow_report(q: ArrowQuery, budget: int = DEFAULT_COLORING_BUDGET, backend: str | None = None) -> dict:
    n, colorings = arrow_cost(q)
    if colorings > budget:
        raise ResourceError(
            f"arrow check needs {q.k}^{n} = {colorings} colorings, budget is {budget}",
            cost=colorings,
            budget=budget,
        )
    t0 = time.perf_counter()
    copies, rows = copy_families(q)
    if q.k == 1:
        free = None if rows else [0] * n
    else:
        free = kernels.first_free_coloring(np.array(rows, dtype=np.int64), n, q.k, backend)
    return {
        "N": n,
        "colorings": colorings,
        "result": free is None,
        "counterexample": None if free is None else {"copies": [list(map(list, c)) for c in copies], "colors": free},
        "elapsed": round(time.perf_counter() - t0, 6),
    }


def arrow_check(q: ArrowQuery, budget: int = DEFAULT_COLORING_BUDGET, backend: str | None = None) -> bool:
    return arrow_report(q, budget, backend)["result"]


def is_homogeneous_somewhere(rows: Sequence[Sequence[int]], colors: Sequence[int]) -> bool:
    """Reference check for one coloring; used to re-verify kernel output."""
    return any(len({colors[i] for i in row}) == 1 for row in rows)


@dataclass(frozen=True)
class Witness:
    sizes: tuple[int, ...]
    structures: tuple[OrderedStructure, ...]
    checked: tuple[tuple[int, ...], ...]

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "C": [format_structure(s) for s in self.structures],
            "checked_sizes": [list(s) for s in self.checked],
        }


def size_schedule(mins: Sequence[int], size_cap: int):
    """Size tuples with ``mins[j] <= s_j <= size_cap``, by total size then lexicographically."""
    ranges = [range(m, size_cap + 1) for m in mins]
    return sorted(itertools.product(*ranges), key=lambda t: (sum(t), t))


def find_witness(
    classes: Sequence[FraisseClass],
    a: Sequence[OrderedStructure],
    b: Sequence[OrderedStructure],
    k: int = 2,
    size_cap: int = 8,
    budget: int = DEFAULT_COLORING_BUDGET,
    backend: str | None = None,
) -> Witness | None:
    """Smallest ``(C_j)`` (in the size schedule) with ``(C_j) -> (B_j)^(A_j)_k``."""
    if not (len(classes) == len(a) == len(b)):
        raise ValidationError("classes, A and B must have one entry per coordinate")
    checked = []
    for sizes in size_schedule([x.size for x in b], size_cap):
        pools = [
            [m for m in enumerate_members(cls, s, DEFAULT_MEMBER_BUDGET) if embeds(bj, m)]
            for cls, s, bj in zip(classes, sizes, b)
        ]
        checked.append(sizes)
        for cs in itertools.product(*pools):
            q = ArrowQuery(tuple(zip(a, b, cs)), k)
            if arrow_check(q, budget, backend):
                return Witness(sizes, tuple(cs), tuple(checked))
    return None


def pigeonhole_check(seq, k: int, m: int, n: int, budget: int = DEFAULT_COLORING_BUDGET, backend: str | None = None) -> bool:
    """Pigeonhole clause of a generating sequence for one triple ``k < m < n``.

    Checks ``(A_{n,j}) -> (A_{m,j})^(A_{k,j})`` over the coordinates ``J_k``
    with two colors.
    """
    if not k < m < n:
        raise ValidationError("pigeonhole check needs k < m < n")
    coords = tuple(
        (seq.structure(k, j), seq.structure(m, j), seq.structure(n, j)) for j in range(seq.width(k))
    )
    return arrow_check(ArrowQuery(coords, 2), budget, backend)
