"""Hot inner loops, each with a numba path and a pure-numpy path.

The numba path is used when numba imports and ``RAMSEY_FORGE_DISABLE_NUMBA``
is unset (or ``0``).  Both paths scan in the same order and return the same
first counterexample, so results never depend on the backend.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLED = os.environ.get("RAMSEY_FORGE_DISABLE_NUMBA", "").strip() not in ("", "0")
HAVE_NUMBA = numba is not None


def default_backend() -> str:
    return "numba" if HAVE_NUMBA and not _DISABLED else "numpy"


def _resolve(backend: str | None) -> str:
    backend = backend or default_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend


def _njit(fn):
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


# -- colorings without a monochromatic family -------------------------------
#
# Elements 0..n-1 are colored with k colors; coloring code c has digit i (base
# k, least significant first) equal to the color of element i.  A family is a
# row of element indices.  The scan looks for the first code whose coloring
# leaves every family non-monochromatic.

@_njit
def _scan_binary_nb(masks, n_elems, start, stop):
    n_rows = masks.shape[0]
    for c in range(start, stop):
        cu = np.uint64(c)
        hit = False
        for r in range(n_rows):
            v = cu & masks[r]
            if v == 0 or v == masks[r]:
                hit = True
                break
        if not hit:
            return c
    return -1


@_njit
def _scan_kary_nb(rows, n_elems, k, start, stop):
    n_rows, width = rows.shape
    digits = np.zeros(n_elems, dtype=np.int64)
    c = start
    for i in range(n_elems):
        digits[i] = c % k
        c //= k
    for code in range(start, stop):
        hit = False
        for r in range(n_rows):
            first = digits[rows[r, 0]]
            same = True
            for t in range(1, width):
                if digits[rows[r, t]] != first:
                    same = False
                    break
            if same:
                hit = True
                break
        if not hit:
            return code
        i = 0
        while i < n_elems:
            digits[i] += 1
            if digits[i] < k:
                break
            digits[i] = 0
            i += 1
    return -1


def _scan_numpy(rows, n_elems, k, start, stop, chunk=1 << 15):
    rows = np.asarray(rows, dtype=np.int64)
    if k == 2 and n_elems <= 62:
        masks = np.zeros(rows.shape[0], dtype=np.int64)
        for r, row in enumerate(rows):
            for e in set(row.tolist()):
                masks[r] |= np.int64(1) << np.int64(e)
        for lo in range(start, stop, chunk):
            codes = np.arange(lo, min(stop, lo + chunk), dtype=np.int64)
            v = codes[:, None] & masks[None, :]
            ok = ((v == 0) | (v == masks[None, :])).any(axis=1)
            if not ok.all():
                return int(codes[np.argmin(ok)])
        return -1
    powers = np.int64(k) ** np.arange(n_elems, dtype=np.int64)
    for lo in range(start, stop, chunk):
        codes = np.arange(lo, min(stop, lo + chunk), dtype=np.int64)
        digits = (codes[:, None] // powers[None, :]) % k
        colors = digits[:, rows]
        ok = (colors == colors[:, :, :1]).all(axis=2).any(axis=1)
        if not ok.all():
            return int(codes[np.argmin(ok)])
    return -1


def first_free_coloring(rows, n_elems: int, k: int, backend: str | None = None) -> list[int] | None:
    """First coloring (in counter order) with no monochromatic row, or None.

    ``rows`` is an integer array of shape (families, width).  With no rows
    every coloring is free; with ``k == 1`` and at least one row none is.
    """
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        return [0] * n_elems
    rows = np.ascontiguousarray(rows.reshape(rows.shape[0], -1))
    total = k**n_elems
    if total >= 2**63:
        raise OverflowError("coloring count exceeds 64-bit range")
    backend = _resolve(backend)
    if backend == "numba":
        if k == 2 and n_elems <= 63:
            masks = np.zeros(rows.shape[0], dtype=np.uint64)
            for r in range(rows.shape[0]):
                m = 0
                for e in rows[r]:
                    m |= 1 << int(e)
                masks[r] = m
            code = _scan_binary_nb(masks, n_elems, 0, total)
        else:
            code = _scan_kary_nb(rows, n_elems, k, 0, total)
    else:
        code = _scan_numpy(rows, n_elems, k, 0, total)
    if code < 0:
        return None
    return [(code // k**i) % k for i in range(n_elems)]


# -- set partitions (restricted growth strings) -----------------------------
#
# For the Erdős–Rado threshold scan: every partition of n_elems points (as an
# RGS) must agree, on some candidate window, with some candidate labeling.
# ``pos[s]`` lists the element indices of window s; ``labels[s, t]`` the class
# labels of those elements under candidate relation t.

@_njit
def _window_matches(a, pos_s, lab_st):
    q = pos_s.shape[0]
    for p in range(q):
        ap = a[pos_s[p]]
        lp = lab_st[p]
        for r in range(p + 1, q):
            if (ap == a[pos_s[r]]) != (lp == lab_st[r]):
                return False
    return True


@_njit
def _scan_rgs_nb(n_elems, pos, labels, limit):
    a = np.zeros(n_elems, dtype=np.int64)
    mx = np.zeros(n_elems, dtype=np.int64)  # mx[i] = max(a[:i]), 0 for i = 0
    n_win, n_lab = labels.shape[0], labels.shape[1]
    count = 0
    while True:
        count += 1
        if count > limit:
            return a, count, 2
        found = False
        for s in range(n_win):
            for t in range(n_lab):
                if _window_matches(a, pos[s], labels[s, t]):
                    found = True
                    break
            if found:
                break
        if not found:
            return a, count, 1
        i = n_elems - 1
        while i >= 1 and a[i] > mx[i]:
            i -= 1
        if i < 1:
            return a, count, 0
        a[i] += 1
        top = max(mx[i], a[i])
        for j in range(i + 1, n_elems):
            a[j] = 0
            mx[j] = top


def iter_rgs(n: int):
    """Restricted growth strings of length ``n`` in lexicographic order."""
    if n == 0:
        yield ()
        return
    a = [0] * n
    mx = [0] * n
    while True:
        yield tuple(a)
        i = n - 1
        while i >= 1 and a[i] > mx[i]:
            i -= 1
        if i < 1:
            return
        a[i] += 1
        top = max(mx[i], a[i])
        for j in range(i + 1, n):
            a[j] = 0
            mx[j] = top


def _scan_rgs_numpy(n_elems, pos, labels, limit):
    lab_eq = labels[:, :, :, None] == labels[:, :, None, :]
    count = 0
    for rgs in iter_rgs(n_elems):
        count += 1
        if count > limit:
            return np.array(rgs), count, 2
        a = np.asarray(rgs)[pos]
        eq = a[:, :, None] == a[:, None, :]
        if not (lab_eq == eq[:, None]).all(axis=(2, 3)).any():
            return np.array(rgs), count, 1
    return np.zeros(n_elems, dtype=np.int64), count, 0


def scan_partitions(n_elems: int, pos, labels, limit: int, backend: str | None = None):
    """Scan all partitions for one that no (window, labeling) pair matches.

    Returns ``(status, rgs, scanned)`` with status ``"all-canonical"``,
    ``"counterexample"`` (``rgs`` is the first failing partition) or
    ``"limit"`` (more than ``limit`` partitions would be needed).
    """
    pos = np.ascontiguousarray(pos, dtype=np.int64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if n_elems == 0:
        return "all-canonical", (), 1
    if _resolve(backend) == "numba":
        a, count, status = _scan_rgs_nb(n_elems, pos, labels, limit)
    else:
        a, count, status = _scan_rgs_numpy(n_elems, pos, labels, limit)
    name = {0: "all-canonical", 1: "counterexample", 2: "limit"}[int(status)]
    rgs = () if name == "all-canonical" else tuple(int(v) for v in a)
    return name, rgs, int(count)
