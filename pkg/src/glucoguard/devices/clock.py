"""Virtual clock with a deterministic event queue."""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Any, List, Optional

from glucoguard.devices.data import TimeReversal

__author__ = "glucoguard"


@dataclass(frozen=True, order=True)
class ScheduledEvent:
    """Queue entry, ordered by due time and then by insertion sequence."""

    due: int
    seq: int
    event: Any = field(compare=False)


class VirtualClock:
    """
    Simulated time in whole seconds.

    Time never goes backwards. Events due at the same time fire in the order they
    were scheduled.
    """

    def __init__(self, start: int = 0):
        """Start the clock at `start' seconds with nothing scheduled."""
        self._now = start
        self._queue: List[ScheduledEvent] = []
        self._seq = itertools.count()

    @property
    def now(self) -> int:
        return self._now

    def __call__(self) -> int:
        """The clock doubles as a ledger clock."""
        return self._now

    def schedule(self, due: int, event: Any) -> ScheduledEvent:
        if due < self._now:
            raise TimeReversal(f"Cannot schedule at {due}, it is already {self._now}")
        entry = ScheduledEvent(due, next(self._seq), event)
        heapq.heappush(self._queue, entry)
        return entry

    @property
    def next_due(self) -> Optional[int]:
        return self._queue[0].due if self._queue else None

    def __len__(self) -> int:
        return len(self._queue)

    def advance(self, until: int) -> List[Any]:
        """Fire every event due at or before `until', in order, and move the clock to `until'."""
        if until < self._now:
            raise TimeReversal(f"Cannot advance to {until}, it is already {self._now}")
        fired = []
        while self._queue and self._queue[0].due <= until:
            entry = heapq.heappop(self._queue)
            self._now = entry.due
            fired.append(entry.event)
        self._now = until
        return fired
