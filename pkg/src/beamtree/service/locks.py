"""Concurrency primitives: named writer locks and read/write locks.

The service handles requests concurrently; these enforce the layer's
contract of one writer per tree and exclusive model mutation per backend
while queries share access.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager


class ReadWriteLock:
    """Writer-preferring read/write lock.

    Readers share; a waiting writer blocks new readers so a fine-tune
    cannot be starved by a steady stream of prediction queries.
    """

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer_active = False
        self._writers_waiting = 0

    @contextmanager
    def read(self):
        with self._cond:
            while self._writer_active or self._writers_waiting:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if self._readers == 0:
                    self._cond.notify_all()

    @contextmanager
    def write(self):
        with self._cond:
            self._writers_waiting += 1
            while self._writer_active or self._readers:
                self._cond.wait()
            self._writers_waiting -= 1
            self._writer_active = True
        try:
            yield
        finally:
            with self._cond:
                self._writer_active = False
                self._cond.notify_all()


class LockTable:
    """Lazily-created locks keyed by registry id."""

    def __init__(self, factory=threading.RLock):
        self._factory = factory
        self._locks: dict[str, object] = {}
        self._guard = threading.Lock()

    def get(self, name: str):
        with self._guard:
            lock = self._locks.get(name)
            if lock is None:
                lock = self._locks[name] = self._factory()
            return lock

    def drop(self, name: str) -> None:
        with self._guard:
            self._locks.pop(name, None)
