"""Content-addressed JSON cache for computed bases and dimension results.

Entries are keyed by a hash of (module version, parameters); every payload
is stored with its own checksum, so a corrupted file is detected on read
and silently recomputed rather than trusted.  Writes are atomic
(write-temp-then-rename).
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

CACHE_VERSION = "divlab-cache-1"


def default_cache_dir() -> str:
    env = os.environ.get("DIVLAB_CACHE")
    if env:
        return env
    return os.path.join(os.path.expanduser("~"), ".cache", "divlab")


class BasisCache:
    def __init__(self, directory: str | None = None):
        self.directory = directory or default_cache_dir()

    def _path(self, key: str) -> str:
        digest = hashlib.sha256(f"{CACHE_VERSION}:{key}".encode()).hexdigest()
        return os.path.join(self.directory, digest[:2], digest + ".json")

    def get(self, key: str):
        path = self._path(key)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError):
            return None
        payload = obj.get("payload")
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        checksum = hashlib.sha256(blob.encode()).hexdigest()
        if obj.get("checksum") != checksum or obj.get("key") != key:
            return None
        return payload

    def put(self, key: str, payload) -> None:
        path = self._path(key)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        obj = {"version": CACHE_VERSION, "key": key,
               "checksum": hashlib.sha256(blob.encode()).hexdigest(),
               "payload": payload}
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(obj, fh, sort_keys=True, separators=(",", ":"))
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def get_or_compute(self, key: str, compute, encode, decode):
        cached = self.get(key)
        if cached is not None:
            try:
                return decode(cached)
            except (KeyError, ValueError, TypeError):
                pass
        value = compute()
        self.put(key, encode(value))
        return value
