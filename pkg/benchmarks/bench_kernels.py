"""Compare the numba and numpy backends on the two hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json]

Each case is run once untimed (numba compiles on first call, cached on disk
afterwards), then timed ``repeat`` times; the best time is reported.  Both
backends must return identical results or the script exits non-zero.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from ramsey_forge import kernels
from ramsey_forge.canonize import _threshold_tables
from ramsey_forge.ramsey import ArrowQuery, copy_families
from ramsey_forge.structures import linear_order as L


def coloring_case(a, b, c, k):
    q = ArrowQuery.single(L(a), L(b), L(c), k)
    copies, rows = copy_families(q)
    rows = np.array(rows, dtype=np.int64)
    return f"colorings C({c},{a}) k={k}", lambda backend: kernels.first_free_coloring(rows, len(copies), k, backend)


def partition_case(m, n, l):
    dom, pos, labels = _threshold_tables(m, n, l)
    return (f"partitions [{m}]^{n} l={l}",
            lambda backend: kernels.scan_partitions(len(dom), pos, labels, 10**7, backend))


CASES = [
    coloring_case(2, 3, 6, 2),   # 2^15, no free coloring: full scan
    coloring_case(1, 3, 5, 3),   # 3^5 with k-ary path
    coloring_case(1, 4, 10, 3),  # 3^10
    coloring_case(2, 3, 7, 2),   # 2^21
    partition_case(4, 2, 3),     # Bell(6)
    partition_case(5, 2, 3),     # Bell(10)
]


def best_of(fn, backend, repeat):
    fn(backend)
    times = []
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(backend)
        times.append(time.perf_counter() - t0)
    return min(times), result


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    if not kernels.HAVE_NUMBA:
        print("numba is not importable; nothing to compare", file=sys.stderr)
        return 1
    rows, mismatch = [], False
    for name, fn in CASES:
        t_nb, r_nb = best_of(fn, "numba", args.repeat)
        t_np, r_np = best_of(fn, "numpy", args.repeat)
        same = r_nb == r_np
        mismatch |= not same
        rows.append({"case": name, "numba_s": round(t_nb, 5), "numpy_s": round(t_np, 5),
                     "speedup": round(t_np / t_nb, 1) if t_nb else None, "agree": same})
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'case':32} {'numba s':>10} {'numpy s':>10} {'speedup':>8}  agree")
        for r in rows:
            print(f"{r['case']:32} {r['numba_s']:>10.5f} {r['numpy_s']:>10.5f} {r['speedup']:>8}  {r['agree']}")
    return 1 if mismatch else 0


if __name__ == "__main__":
    sys.exit(main())
