"""Evaluator-call and batch accounting."""

from __future__ import annotations

import math
import threading
import time
from contextlib import contextmanager

DEFAULT_BATCH_SIZE = 64


def n_batches(n_items, batch_size=DEFAULT_BATCH_SIZE):
    return math.ceil(n_items / batch_size) if n_items > 0 else 0


class EvalLedger:
    """Counts evaluator calls and batches, optionally split by phase.

    Updates are serialized with a lock so concurrent batches can share one
    ledger.
    """

    def __init__(self, batch_size=DEFAULT_BATCH_SIZE):
        if batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {batch_size}")
        self.batch_size = batch_size
        self.evaluator_calls = 0
        self.batches = 0
        self.wall_time = 0.0
        self.phases = {}
        self._lock = threading.Lock()
        self._phase = "evaluation"

    def record(self, n_calls, n_batches_=None):
        if n_batches_ is None:
            n_batches_ = n_batches(n_calls, self.batch_size)
        with self._lock:
            self.evaluator_calls += n_calls
            self.batches += n_batches_
            ph = self.phases.setdefault(self._phase, {"calls": 0, "batches": 0, "seconds": 0.0})
            ph["calls"] += n_calls
            ph["batches"] += n_batches_

    @contextmanager
    def phase(self, name):
        previous = self._phase
        self._phase = name
        start = time.perf_counter()
        try:
            yield self
        finally:
            elapsed = time.perf_counter() - start
            with self._lock:
                ph = self.phases.setdefault(name, {"calls": 0, "batches": 0, "seconds": 0.0})
                ph["seconds"] += elapsed
                self.wall_time += elapsed
            self._phase = previous

    def merge(self, other):
        with self._lock:
            self.evaluator_calls += other.evaluator_calls
            self.batches += other.batches
            self.wall_time += other.wall_time
            for name, ph in other.phases.items():
                mine = self.phases.setdefault(name, {"calls": 0, "batches": 0, "seconds": 0.0})
                for key in mine:
                    mine[key] += ph[key]

    def __repr__(self):
        return (
            f"EvalLedger(calls={self.evaluator_calls}, batches={self.batches}, "
            f"wall_time={self.wall_time:.3f}s)"
        )
