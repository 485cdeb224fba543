"""A small dynamically scheduled task pool with priorities.

Tasks are plain callables pushed to a shared priority queue and picked up
by whichever worker thread is free.  Tasks may spawn further tasks into the
same :class:`TaskGroup`; only the orchestrating thread blocks on a group.
"""
from __future__ import annotations

import itertools
import queue
import threading
import time


class AtomicCounter:
    """Integer with indivisible read-modify-write."""

    def __init__(self, value: int = 0, record: bool = False):
        self._value = value
        self._lock = threading.Lock()
        self.samples: list[tuple[float, int]] | None = [(0.0, value)] if record else None
        self._t0 = time.perf_counter()

    @property
    def value(self) -> int:
        return self._value

    def fetch_add(self, delta: int) -> int:
        with self._lock:
            old = self._value
            self._value = old + delta
            if self.samples is not None:
                self.samples.append((time.perf_counter() - self._t0, old + delta))
            return old


class TaskGroup:
    def __init__(self, name: str = ""):
        self.name = name
        self._pending = 0
        self._cond = threading.Condition()
        self.errors: list[BaseException] = []

    def _add(self):
        with self._cond:
            self._pending += 1

    def _done(self, exc=None):
        with self._cond:
            if exc is not None:
                self.errors.append(exc)
            self._pending -= 1
            if self._pending == 0:
                self._cond.notify_all()

    def wait(self):
        with self._cond:
            while self._pending:
                self._cond.wait()
        if self.errors:
            raise self.errors[0]


_STOP = object()


class TaskPool:
    """Worker threads draining a priority queue (lower number runs first)."""

    def __init__(self, threads: int = 1):
        if threads < 1:
            raise ValueError("need at least one thread")
        self.threads = threads
        self._queue: queue.PriorityQueue = queue.PriorityQueue()
        self._seq = itertools.count()
        self._workers = [
            threading.Thread(target=self._work, name=f"augtrees-worker-{i}", daemon=True)
            for i in range(threads)
        ]
        for w in self._workers:
            w.start()

    def spawn(self, group: TaskGroup, fn, *args, priority: int = 0) -> None:
        group._add()
        self._queue.put((priority, next(self._seq), group, fn, args))

    def parallel_for(self, group: TaskGroup, lo: int, hi: int, chunk: int, fn, priority: int = 0):
        """Spawn ``fn(a, b)`` over contiguous chunks of ``[lo, hi)``."""
        for a in range(lo, hi, chunk):
            self.spawn(group, fn, a, min(a + chunk, hi), priority=priority)

    def _work(self):
        while True:
            item = self._queue.get()
            if item[3] is _STOP:
                return
            _, _, group, fn, args = item
            try:
                fn(*args)
            except BaseException as exc:  # surfaced by TaskGroup.wait
                group._done(exc)
            else:
                group._done()

    def close(self):
        for _ in self._workers:
            self._queue.put((float("inf"), next(self._seq), None, _STOP, ()))
        for w in self._workers:
            w.join()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
