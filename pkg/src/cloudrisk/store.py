"""Versioned document store backed by a directory of JSON files.

Single-writer per store; concurrent readers are fine. Writes carry a
per-key version counter so a caller can detect lost updates by passing
the version it read (optimistic concurrency); there is no cross-process
locking beyond that and the serve lock.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .errors import ConflictError, StoreError, UnknownIdError

SERVE_LOCK_NAME = "serve.lock"


class Store:
    def __init__(self, root: str | Path, create: bool = True):
        self.root = Path(root)
        if create:
            try:
                self.root.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                raise StoreError(f"cannot create store at {self.root}: {exc}") from exc
        if not self.root.is_dir():
            raise StoreError(f"store root {self.root} is not a directory")

    def probe_writable(self) -> None:
        """Fail fast with a diagnostic if the store cannot be written."""
        probe = self.root / ".write-probe"
        try:
            probe.write_text("ok")
            probe.unlink()
        except OSError as exc:
            raise StoreError(f"store at {self.root} is not writable: {exc}") from exc

    # -- documents -----------------------------------------------------------

    def _path(self, key: str) -> Path:
        if ".." in key.split("/"):
            raise StoreError(f"illegal store key {key!r}")
        return self.root / (key + ".json")

    def exists(self, key: str) -> bool:
        return self._path(key).exists()

    def get(self, key: str) -> tuple[dict, int]:
        """Return (document, version) for a key."""
        path = self._path(key)
        if not path.exists():
            raise UnknownIdError(f"no document at store key {key!r}")
        try:
            wrapper = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise StoreError(f"corrupt document at {key!r}: {exc}") from exc
        return wrapper["doc"], wrapper["version"]

    def put(self, key: str, doc: dict, expected_version: int | None = None) -> int:
        """Write a document, bumping its version counter.

        If ``expected_version`` is given and does not match the stored
        version, the write is refused (lost-update detection).
        """
        path = self._path(key)
        current = 0
        if path.exists():
            current = json.loads(path.read_text())["version"]
        if expected_version is not None and expected_version != current:
            raise ConflictError(
                f"version conflict on {key!r}: stored {current}, "
                f"expected {expected_version}"
            )
        version = current + 1
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps({"version": version, "doc": doc}, indent=1))
        os.replace(tmp, path)
        return version

    def delete(self, key: str) -> None:
        path = self._path(key)
        if not path.exists():
            raise UnknownIdError(f"no document at store key {key!r}")
        path.unlink()

    def list(self, prefix: str) -> list[str]:
        base = self.root / prefix
        if not base.is_dir():
            return []
        return sorted(p.stem for p in base.glob("*.json"))

    # -- serve lock ------------------------------------------------------------

    def acquire_serve_lock(self) -> None:
        """Claim exclusive serving rights on this store."""
        lock = self.root / SERVE_LOCK_NAME
        try:
            fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreError(
                f"store at {self.root} is already served (lock file "
                f"{SERVE_LOCK_NAME} present); stop the other instance or "
                f"remove the stale lock"
            ) from None
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))

    def release_serve_lock(self) -> None:
        lock = self.root / SERVE_LOCK_NAME
        if lock.exists():
            lock.unlink()
