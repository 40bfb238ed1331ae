"""Rolling-window engagement collection.

Engagement on a post (likes, comments, shares) is snapshotted once, a
fixed delay after the post's creation; most activity happens in the
first days, so the window trades a small loss of late engagement for
robustness against later deletions. The clock is injected so tests can
run an eight-day window in milliseconds.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Protocol

from .ingest import EngagementSnapshot, Post, Store
from .model import Config
from .simulator import GroundTruth

log = logging.getLogger(__name__)

RETRY_LIMIT = 3
RETRY_BACKOFF = timedelta(minutes=1)


class EngagementSource(Protocol):
    def fetch(self, key: tuple[str, str], at: datetime) -> tuple[int, int, int, tuple]: ...


class VirtualClock:
    def __init__(self, now: datetime):
        self._now = now

    def now(self) -> datetime:
        return self._now

    def advance_to(self, instant: datetime) -> None:
        if instant < self._now:
            raise ValueError("clock cannot run backwards")
        self._now = instant

    def advance(self, delta: timedelta) -> None:
        self.advance_to(self._now + delta)


@dataclass
class WindowQueue:
    """Pending engagement captures ordered by due instant."""

    _heap: list[tuple[datetime, str, str, int]] = field(default_factory=list)
    _due: dict[tuple[str, str], datetime] = field(default_factory=dict)
    _done: set[tuple[str, str]] = field(default_factory=set)

    def __len__(self) -> int:
        return len(self._heap)

    def due_of(self, key: tuple[str, str]) -> datetime | None:
        return self._due.get(key)

    def entries(self) -> list[tuple[tuple[str, str], datetime]]:
        return [((p, i), due) for due, p, i, _ in sorted(self._heap)]


def schedule(post: Post, cfg: Config, queue: WindowQueue) -> datetime:
    """Enqueue once; re-scheduling returns the existing due instant."""
    existing = queue.due_of(post.key)
    if existing is not None:
        return existing
    due = post.created_at + cfg.rolling_window
    queue._due[post.key] = due
    heapq.heappush(queue._heap, (due, post.platform, post.post_id, 0))
    return due


def collect_due(
    now: datetime,
    queue: WindowQueue,
    source: EngagementSource,
    sink: Store,
) -> list[EngagementSnapshot]:
    """Snapshot every entry whose due instant has passed, exactly once.

    A failing source keeps the entry queued with exponential backoff;
    after RETRY_LIMIT failed attempts the entry is dropped and logged.
    """
    captured: list[EngagementSnapshot] = []
    while queue._heap and queue._heap[0][0] <= now:
        due, platform, post_id, attempts = heapq.heappop(queue._heap)
        key = (platform, post_id)
        if key in queue._done:
            continue
        try:
            likes, comments, shares, items = source.fetch(key, now)
        except Exception as exc:  # noqa: BLE001 - any source failure is retryable
            if attempts + 1 >= RETRY_LIMIT:
                log.warning("giving up on %s/%s after %d attempts: %s", platform, post_id, attempts + 1, exc)
                queue._done.add(key)
            else:
                backoff = RETRY_BACKOFF * (2**attempts)
                heapq.heappush(queue._heap, (now + backoff, platform, post_id, attempts + 1))
            continue
        if min(likes, comments, shares) < 0 or len(items) > comments:
            raise ValueError(f"source returned inconsistent engagement for {platform}/{post_id}")
        snapshot = EngagementSnapshot(
            post_id=post_id,
            platform=platform,
            captured_at=now,
            likes=likes,
            comments=comments,
            shares=shares,
            comment_items=items,
        )
        sink.add_engagement(snapshot)
        queue._done.add(key)
        captured.append(snapshot)
    return captured


class WindowScheduler:
    """Drives a queue against a virtual clock, capturing at exact dues."""

    def __init__(self, cfg: Config, clock: VirtualClock, source: EngagementSource, sink: Store):
        self.cfg = cfg
        self.clock = clock
        self.source = source
        self.sink = sink
        self.queue = WindowQueue()

    def schedule(self, post: Post) -> datetime:
        return schedule(post, self.cfg, self.queue)

    def run_until(self, until: datetime) -> list[EngagementSnapshot]:
        """Advance the clock due-by-due so captures land on their instant."""
        captured: list[EngagementSnapshot] = []
        while self.queue._heap and self.queue._heap[0][0] <= until:
            next_due = self.queue._heap[0][0]
            if next_due > self.clock.now():
                self.clock.advance_to(next_due)
            captured.extend(collect_due(self.clock.now(), self.queue, self.source, self.sink))
        if until > self.clock.now():
            self.clock.advance_to(until)
        return captured


@dataclass(frozen=True)
class LossReport:
    """What the rolling window misses, measured against ground truth."""

    total_events: int
    missed_late: float
    missed_deleted: float


def window_loss(truth: GroundTruth, cfg: Config) -> LossReport:
    """Fraction of engagement arriving after the due instant, and fraction
    arriving in time but deleted again before it."""
    total = late = deleted = 0
    for key, events in truth.engagement.items():
        post_truth = truth.posts.get(key)
        if post_truth is None:
            continue
        due = post_truth.created_at + cfg.rolling_window
        for event in events:
            total += 1
            if event.at > due:
                late += 1
            elif event.deleted_at is not None and event.deleted_at <= due:
                deleted += 1
    if total == 0:
        return LossReport(0, 0.0, 0.0)
    return LossReport(total, late / total, deleted / total)
