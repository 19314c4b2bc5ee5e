
import numpy as np
import pytest
from hypothesis import given, strategies as st

from ramsey_forge import kernels
from ramsey_forge.canonize import bell

BACKENDS = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])


def reference_first_free(rows, n, k):
    for code in range(k**n):
        colors = [(code // k**i) % k for i in range(n)]
        if not any(len({colors[i] for i in row}) == 1 for row in rows):
            return colors
    return None


@st.composite
def families(draw):
    n = draw(st.integers(1, 9))
    width = draw(st.integers(1, min(3, n)))
    rows = draw(st.lists(st.lists(st.integers(0, n - 1), min_size=width, max_size=width), min_size=1, max_size=6))
    return n, np.array(rows, dtype=np.int64)


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("k", [2, 3])
@given(families())
def test_first_free_coloring_matches_reference(backend, k, fam):
    n, rows = fam
    assert kernels.first_free_coloring(rows, n, k, backend) == reference_first_free(rows.tolist(), n, k)


def test_empty_family_is_free():
    assert kernels.first_free_coloring(np.zeros((0, 2), dtype=np.int64), 3, 2) == [0, 0, 0]


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.first_free_coloring([[0]], 1, 2, "fortran")


@pytest.mark.parametrize("n", range(8))
def test_rgs_count_is_bell(n):
    strings = list(kernels.iter_rgs(n))
    assert len(strings) == bell(n) == len(set(strings))
    assert strings == sorted(strings)


def test_bell_numbers():
    assert [bell(n) for n in range(8)] == [1, 1, 2, 5, 15, 52, 203, 877]


@pytest.mark.parametrize("backend", BACKENDS)
def test_scan_partitions_backends_agree(backend):
    from ramsey_forge.canonize import _threshold_tables

    for m, n, l in [(3, 1, 2), (4, 1, 3), (5, 1, 3), (4, 2, 3)]:
        dom, pos, labels = _threshold_tables(m, n, l)
        got = kernels.scan_partitions(len(dom), pos, labels, 10**6, backend)
        ref = kernels.scan_partitions(len(dom), pos, labels, 10**6, "numpy")
        assert got == ref


def test_scan_partitions_limit():
    from ramsey_forge.canonize import _threshold_tables

    dom, pos, labels = _threshold_tables(5, 1, 3)
    status, _, scanned = kernels.scan_partitions(len(dom), pos, labels, 3)
    assert status == "limit" and scanned == 4


def test_env_flag_selects_numpy(monkeypatch):
    import importlib

    monkeypatch.setenv("RAMSEY_FORGE_DISABLE_NUMBA", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.default_backend() == "numpy"
    finally:
        monkeypatch.delenv("RAMSEY_FORGE_DISABLE_NUMBA")
        importlib.reload(kernels)
