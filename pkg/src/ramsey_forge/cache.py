"""Content-addressed on-disk cache for enumeration results.

Keys are SHA-256 digests of a canonical JSON encoding of the operation, its
parameters and the tool version.  Entries are written to a temporary file and
moved into place with :func:`os.replace`, so readers never see partial files.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from pathlib import Path

from . import __version__

ENV_VAR = "RAMSEY_FORGE_CACHE"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(base) / "ramsey_forge"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


class Cache:
    def __init__(self, directory: str | Path | None = None, version: str = __version__):
        self.dir = Path(directory) if directory is not None else default_cache_dir()
        self.version = version

    def key(self, op: str, params: dict) -> str:
        material = canonical_json({"op": op, "params": params, "version": self.version})
        return hashlib.sha256(material.encode()).hexdigest()

    def _path(self, key: str) -> Path:
        return self.dir / key[:2] / f"{key}.json"

    def get(self, op: str, params: dict):
        """Cached value, or ``None`` on a miss (absent, unreadable or stale entry)."""
        path = self._path(self.key(op, params))
        try:
            entry = json.loads(path.read_text())
        except (OSError, ValueError):
            return None
        meta = entry.get("metadata", {})
        if meta.get("version") != self.version or meta.get("op") != op or meta.get("params") != params:
            return None
        return entry.get("value")

    def put(self, op: str, params: dict, value) -> str:
        key = self.key(op, params)
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        entry = {
            "metadata": {"version": self.version, "op": op, "params": params, "timestamp": time.time()},
            "value": value,
        }
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(canonical_json(entry))
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise
        return key

    def cached(self, op: str, params: dict, compute):
        """Return the cached value, computing and storing it on a miss."""
        hit = self.get(op, params)
        if hit is not None:
            return hit
        value = compute()
        self.put(op, params, value)
        return value
