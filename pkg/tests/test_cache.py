import json

from ramsey_forge.cache import Cache, default_cache_dir


def test_round_trip_and_miss(tmp_path):
    c = Cache(tmp_path)
    assert c.get("op", {"a": 1}) is None
    c.put("op", {"a": 1}, [1, 2, 3])
    assert c.get("op", {"a": 1}) == [1, 2, 3]
    assert c.get("op", {"a": 2}) is None


def test_key_is_order_independent(tmp_path):
    c = Cache(tmp_path)
    assert c.key("op", {"a": 1, "b": 2}) == c.key("op", {"b": 2, "a": 1})
    assert c.key("op", {"a": 1}) != c.key("op2", {"a": 1})


def test_version_bump_invalidates(tmp_path):
    Cache(tmp_path, version="1").put("op", {}, "old")
    assert Cache(tmp_path, version="2").get("op", {}) is None
    # even a stale entry planted under the new key is rejected by its metadata
    new = Cache(tmp_path, version="2")
    path = new._path(new.key("op", {}))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"metadata": {"version": "1", "op": "op", "params": {}}, "value": "old"}))
    assert new.get("op", {}) is None


def test_corrupt_entry_is_a_miss(tmp_path):
    c = Cache(tmp_path)
    c.put("op", {}, 1)
    c._path(c.key("op", {})).write_text("{not json")
    assert c.get("op", {}) is None
    assert c.cached("op", {}, lambda: 7) == 7
    assert c.get("op", {}) == 7


def test_no_temp_files_left(tmp_path):
    c = Cache(tmp_path)
    c.put("op", {"x": 1}, {"big": list(range(100))})
    assert not list(tmp_path.rglob(".tmp-*"))


def test_env_override(monkeypatch, tmp_path):
    monkeypatch.setenv("RAMSEY_FORGE_CACHE", str(tmp_path))
    assert default_cache_dir() == tmp_path


def test_cached_result_is_identical_to_fresh(tmp_path):
    from ramsey_forge.fraisse import TRIANGLE_FREE, enumerate_members
    from ramsey_forge.structures import format_structure

    c = Cache(tmp_path)
    fresh = [format_structure(m) for m in enumerate_members(TRIANGLE_FREE, 3)]
    params = {"class": TRIANGLE_FREE.describe(), "size": 3}
    first = c.cached("enumerate", params, lambda: fresh)
    second = c.cached("enumerate", params, lambda: None)
    assert first == second == fresh
