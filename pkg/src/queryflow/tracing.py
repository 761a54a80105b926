"""Per-request execution traces.

Every answer carries a trace: which steps ran (in order), how long each took,
and how many backend calls each one made. Steps that degrade instead of
failing record a note so the degradation is visible to clients.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

from .errors import QueryflowError


@dataclass
class StepRecord:
    step: str
    duration_ms: int = 0
    calls: dict[str, int] = field(default_factory=dict)
    note: str | None = None

    def to_dict(self) -> dict:
        record: dict = {"step": self.step, "duration_ms": self.duration_ms, "calls": dict(self.calls)}
        if self.note is not None:
            record["note"] = self.note
        return record


class Trace:
    """Ordered list of step records for one request."""

    def __init__(self):
        self.records: list[StepRecord] = []

    def add(self, step: str, duration_ms: int = 0, calls: dict[str, int] | None = None,
            note: str | None = None) -> StepRecord:
        record = StepRecord(step, duration_ms, dict(calls or {}), note)
        self.records.append(record)
        return record

    @contextmanager
    def step(self, name: str, counter=None):
        """Record one step, measuring duration and backend-call deltas.

        Engine errors raised inside the step are stamped with the step name
        (first raiser wins) and re-raised after the record is appended.
        """
        before = counter.counts() if counter is not None else {}
        start = time.perf_counter()
        record = StepRecord(name)
        try:
            yield record
        except QueryflowError as exc:
            record.note = f"error: {exc.kind}"
            if exc.step is None:
                exc.step = name
            raise
        finally:
            record.duration_ms = max(0, int((time.perf_counter() - start) * 1000))
            if counter is not None:
                after = counter.counts()
                record.calls = {
                    key: after[key] - before.get(key, 0)
                    for key in after
                    if after[key] - before.get(key, 0) > 0
                }
            self.records.append(record)

    def total_calls(self) -> int:
        return sum(sum(r.calls.values()) for r in self.records)

    def steps(self) -> list[str]:
        return [r.step for r in self.records]

    def to_list(self) -> list[dict]:
        return [r.to_dict() for r in self.records]
