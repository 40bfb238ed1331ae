"""Aggregations over a finalized store.

Every operation here is a read-only scan: daily activity by selection
logic, attention ranking of selectors (analysis-mode matching, so
"#noafd" and "@AfDBerlin" count toward "afd"), per-party engagement
sums, top accounts by reach metric, and follower-set diffs between
snapshots.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Callable, Iterable, Sequence

from .ingest import FollowerSnapshot, Post, Store
from .model import PARTIES
from .selectors import LOGICS, CompiledSelectors, analysis_matches

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimePoint:
    day: date
    absolute: int
    relative: float


@dataclass
class TimeSeries:
    granularity: str
    points: list[TimePoint]
    filter: dict = field(default_factory=dict)

    def total(self) -> int:
        return sum(p.absolute for p in self.points)


def _period_days(store: Store) -> list[date]:
    start, end = store.registry.collection_period
    first, last = start.date(), end.date()
    return [first + timedelta(days=i) for i in range((last - first).days + 1)]


def _series_from_counts(
    days: Sequence[date], counts: Counter, totals: Counter, descriptor: dict
) -> TimeSeries:
    points = [
        TimePoint(day, counts.get(day, 0), counts.get(day, 0) / totals[day] if totals.get(day) else 0.0)
        for day in days
    ]
    return TimeSeries("day", points, descriptor)


def daily_series(
    store: Store,
    logics: Iterable[str] | None = None,
    lang_filter: Callable[[Sequence[Post]], list[Post]] | None = None,
) -> dict[str, TimeSeries]:
    """One zero-filled daily series per selection logic.

    A post contributes to every logic in its logic set, reproducing the
    duplicate counting of the published by-logic figures. The relative
    value divides by all stored posts of that day under the same
    language filter.
    """
    wanted = tuple(logics) if logics is not None else LOGICS
    days = _period_days(store)
    posts: Iterable[Post] = store.posts.values()
    if lang_filter is not None:
        posts = lang_filter(list(posts))
    day_range = (days[0], days[-1]) if days else None
    totals: Counter = Counter()
    counts: dict[str, Counter] = {logic: Counter() for logic in wanted}
    for post in posts:
        day = post.created_at.date()
        if day_range is None or not day_range[0] <= day <= day_range[1]:
            continue
        totals[day] += 1
        match = store.matches.get(post.key)
        if match is None:
            continue
        for logic in match.logics:
            if logic in counts:
                counts[logic][day] += 1
    descriptor_base = {"lang_filter": getattr(lang_filter, "__name__", None) if lang_filter else None}
    return {
        logic: _series_from_counts(days, counts[logic], totals, {**descriptor_base, "logic": logic})
        for logic in wanted
    }


def top_selectors(store: Store, cs: CompiledSelectors, k: int) -> list[tuple[str, int]]:
    """Most-mentioned selectors under analysis-mode matching.

    Each (post, selector) pair counts once; ties break lexicographically.
    """
    counter: Counter = Counter()
    for post in store.posts.values():
        for text in analysis_matches(post, cs):
            counter[text] += 1
    ranked = sorted(counter.items(), key=lambda item: (-item[1], item[0]))
    return ranked[: max(k, 0)]


@dataclass(frozen=True)
class PartyEngagement:
    party: str
    posts: int
    likes: int
    comments: int
    shares: int


def party_engagement(store: Store, platform: str | None = None) -> list[PartyEngagement]:
    """Posts and received engagement summed per party.

    A post belongs to the party of its author account (candidate accounts
    inherit their candidate's party); engagement uses the latest snapshot
    per post so repeated captures never double count.
    """
    registry = store.registry
    sums: dict[str, list[int]] = {party: [0, 0, 0, 0] for party in PARTIES}
    for key, post in store.posts.items():
        if platform is not None and post.platform != platform:
            continue
        account = registry.account_for(post.platform, post.author_handle, post.author_id)
        if account is None:
            continue
        party = registry.party_of_account(account)
        if party is None:
            continue
        row = sums[party]
        row[0] += 1
        snap = store.latest_engagement(key)
        if snap is not None:
            row[1] += snap.likes
            row[2] += snap.comments
            row[3] += snap.shares
    return [
        PartyEngagement(party, *sums[party])
        for party in sorted(PARTIES)
    ]


@dataclass
class PartyTopAccounts:
    party: str
    accounts: list[tuple[str, int]]  # (handle, metric value) descending
    party_average: float


def _metric_value(store: Store, account, metric: str) -> int:
    if metric == "page_likes":
        return account.page_likes or 0
    if metric == "followers":
        snap = store.latest_follower_snapshot(account.account_id)
        return len(snap.follower_ids) if snap else 0
    raise ValueError(f"unknown metric {metric!r}")


def top_accounts(
    store: Store,
    platform: str,
    metric: str,
    k: int,
    average_base: str = "public_active",
) -> dict[str, PartyTopAccounts]:
    """Per party: the k highest-metric accounts plus the party average.

    The published party averages never state their base population; the
    default averages over all public & active accounts of the party and
    ``average_base="all"`` widens it to every account.
    """
    if average_base not in ("public_active", "all"):
        raise ValueError(f"unknown average base {average_base!r}")
    registry = store.registry
    out: dict[str, PartyTopAccounts] = {}
    for party in sorted(PARTIES):
        accounts = [
            a
            for a in registry.accounts
            if a.platform == platform and registry.party_of_account(a) == party
        ]
        if not accounts:
            log.info("party %s has no %s accounts; omitted from top accounts", party, platform)
            continue
        valued = [(a, _metric_value(store, a, metric)) for a in accounts]
        ranked = sorted(valued, key=lambda av: (-av[1], av[0].handle))
        base = [
            value
            for account, value in valued
            if average_base == "all" or (account.visibility == "public" and account.active)
        ]
        average = sum(base) / len(base) if base else 0.0
        out[party] = PartyTopAccounts(
            party=party,
            accounts=[(a.handle, value) for a, value in ranked[: max(k, 0)]],
            party_average=average,
        )
    return out


def follower_diff(a: FollowerSnapshot, b: FollowerSnapshot) -> tuple[set[int], set[int]]:
    """(gained, lost) between two snapshots of the same account."""
    if a.account_id != b.account_id:
        raise ValueError(f"snapshots of different accounts: {a.account_id} vs {b.account_id}")
    if not a.captured_at < b.captured_at:
        raise ValueError("first snapshot must predate the second")
    return set(b.follower_ids - a.follower_ids), set(a.follower_ids - b.follower_ids)


# --- CSV renderings ----------------------------------------------------------


def timeseries_csv(series_by_name: dict[str, TimeSeries]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["series", "date", "absolute", "relative"])
    for name in sorted(series_by_name):
        for point in series_by_name[name].points:
            writer.writerow([name, point.day.isoformat(), point.absolute, point.relative])
    return out.getvalue()


def top_selectors_csv(ranked: list[tuple[str, int]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["selector", "count"])
    writer.writerows(ranked)
    return out.getvalue()


def party_engagement_csv(rows: list[PartyEngagement]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["party", "posts", "likes", "comments", "shares"])
    for row in rows:
        writer.writerow([row.party, row.posts, row.likes, row.comments, row.shares])
    return out.getvalue()


def top_accounts_csv(by_party: dict[str, PartyTopAccounts]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["party", "rank", "handle", "value", "party_average"])
    for party in sorted(by_party):
        entry = by_party[party]
        for rank, (handle, value) in enumerate(entry.accounts, start=1):
            writer.writerow([party, rank, handle, value, entry.party_average])
        if not entry.accounts:
            writer.writerow([party, "", "", "", entry.party_average])
    return out.getvalue()
