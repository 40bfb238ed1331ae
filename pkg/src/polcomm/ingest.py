"""Collectors, the deduplicating store, and ex-post keyword backfill.

Redundancy is the reliability strategy: several collectors may feed the
same store (or separate stores merged later). A post is stored once per
(platform, post_id); the selection logics of all deliveries are unioned
onto that single record, so "collected twice because it addresses two
target concepts" never duplicates data.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Iterator, Protocol, Sequence

from .model import Registry, Selector, format_instant, parse_instant
from .selectors import (
    CompiledSelectors,
    MatchResult,
    classify,
    compile_selectors,
    match_text,
    union_matches,
)

log = logging.getLogger(__name__)

POST_KINDS = ("original", "retweet", "reply", "page_post", "comment")

CHECKPOINT_EVERY_POSTS = 1000
CHECKPOINT_EVERY = timedelta(seconds=5)


@dataclass
class Post:
    """A collected message in the archive/replay schema."""

    post_id: str
    platform: str
    author_handle: str
    created_at: datetime
    text: str
    kind: str = "original"
    author_id: int | None = None
    referenced_post_id: str | None = None
    referenced_author_handle: str | None = None
    mentioned_handles: list[str] = field(default_factory=list)
    hashtags: list[str] = field(default_factory=list)
    detected_lang: str = "de"
    interface_lang: str | None = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.platform, self.post_id)

    def to_record(self) -> dict:
        rec = {
            "post_id": self.post_id,
            "platform": self.platform,
            "author_handle": self.author_handle,
            "created_at": format_instant(self.created_at),
            "text": self.text,
            "kind": self.kind,
            "mentioned_handles": self.mentioned_handles,
            "hashtags": self.hashtags,
            "detected_lang": self.detected_lang,
        }
        if self.author_id is not None:
            rec["author_id"] = self.author_id
        if self.referenced_post_id is not None:
            rec["referenced_post_id"] = self.referenced_post_id
        if self.referenced_author_handle is not None:
            rec["referenced_author_handle"] = self.referenced_author_handle
        if self.interface_lang is not None:
            rec["interface_lang"] = self.interface_lang
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "Post":
        kind = rec.get("kind", "original")
        if kind not in POST_KINDS:
            raise ValueError(f"unknown post kind {kind!r}")
        if kind in ("retweet", "reply", "comment") and not rec.get("referenced_post_id"):
            raise ValueError(f"post {rec.get('post_id')!r} of kind {kind} lacks referenced_post_id")
        return cls(
            post_id=str(rec["post_id"]),
            platform=rec["platform"],
            author_handle=rec["author_handle"],
            created_at=parse_instant(rec["created_at"]),
            text=rec.get("text", ""),
            kind=kind,
            author_id=rec.get("author_id"),
            referenced_post_id=rec.get("referenced_post_id"),
            referenced_author_handle=rec.get("referenced_author_handle"),
            mentioned_handles=list(rec.get("mentioned_handles", [])),
            hashtags=[h.lower().lstrip("#") for h in rec.get("hashtags", [])],
            detected_lang=rec.get("detected_lang", "und"),
            interface_lang=rec.get("interface_lang"),
        )


@dataclass(frozen=True)
class EngagementSnapshot:
    """Engagement counts for one post captured at one instant."""

    post_id: str
    platform: str
    captured_at: datetime
    likes: int
    comments: int
    shares: int
    comment_items: tuple = ()

    def to_record(self) -> dict:
        return {
            "post_id": self.post_id,
            "platform": self.platform,
            "captured_at": format_instant(self.captured_at),
            "likes": self.likes,
            "comments": self.comments,
            "shares": self.shares,
            "comment_items": [p.to_record() for p in self.comment_items],
        }


@dataclass(frozen=True)
class FollowerSnapshot:
    account_id: str
    captured_at: datetime
    follower_ids: frozenset[int]

    def to_record(self) -> dict:
        return {
            "account_id": self.account_id,
            "captured_at": format_instant(self.captured_at),
            "follower_ids": sorted(self.follower_ids),
        }


class StoreVersionError(ValueError):
    pass


class Store:
    """Deduplicated post store keyed by (platform, post_id).

    Upserts are serialized by a lock so concurrent collectors cannot lose
    a logic-set union; the merged value per key is a commutative monoid.
    """

    def __init__(self, registry: Registry, compiled: CompiledSelectors | None = None):
        self.registry = registry
        self.compiled = compiled if compiled is not None else compile_selectors(registry.selectors)
        self.registry_version = registry.version()
        self.selector_version = registry.selector_version()
        self.posts: dict[tuple[str, str], Post] = {}
        self.matches: dict[tuple[str, str], MatchResult] = {}
        self.engagement: dict[tuple[str, str], list[EngagementSnapshot]] = {}
        self.follower_snapshots: dict[tuple[str, str], FollowerSnapshot] = {}
        self.ingestion_log: list[dict] = []
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.posts)

    def upsert(self, post: Post, match: MatchResult) -> bool:
        """Insert or union; returns True when the post was a duplicate."""
        key = post.key
        with self._lock:
            existing = self.posts.get(key)
            if existing is None:
                self.posts[key] = post
                self.matches[key] = match
                return False
            if existing.to_record() != post.to_record():
                # first-seen field values win; disagreement is only logged
                log.info("conflicting duplicate for %s/%s; keeping first-seen fields", *key)
            self.matches[key] = union_matches(self.matches[key], match)
            return True

    def add_engagement(self, snapshot: EngagementSnapshot) -> bool:
        key = (snapshot.platform, snapshot.post_id)
        with self._lock:
            existing = self.engagement.setdefault(key, [])
            if any(s.captured_at == snapshot.captured_at for s in existing):
                return False
            existing.append(snapshot)
            existing.sort(key=lambda s: s.captured_at)
            return True

    def add_follower_snapshot(self, snapshot: FollowerSnapshot) -> bool:
        key = (snapshot.account_id, format_instant(snapshot.captured_at))
        with self._lock:
            if key in self.follower_snapshots:
                return False
            self.follower_snapshots[key] = snapshot
            return True

    def latest_engagement(self, key: tuple[str, str]) -> EngagementSnapshot | None:
        snaps = self.engagement.get(key)
        return snaps[-1] if snaps else None

    def latest_follower_snapshot(self, account_id: str) -> FollowerSnapshot | None:
        best = None
        for snap in self.follower_snapshots.values():
            if snap.account_id == account_id and (best is None or snap.captured_at > best.captured_at):
                best = snap
        return best

    def recheck_matches(self) -> bool:
        """True iff every stored logic set equals a fresh classification.

        Holds for purely collector-built stores; backfill with extra
        keywords legitimately adds selector provenance on top.
        """
        for key, post in self.posts.items():
            if classify(post, self.registry, self.compiled).logics != self.matches[key].logics:
                return False
        return True

    # --- serialization ---------------------------------------------------

    def canonical_dict(self) -> dict:
        start, end = self.registry.collection_period
        return {
            "format": "store/1",
            "registry_version": self.registry_version,
            "selector_version": self.selector_version,
            "period": [format_instant(start), format_instant(end)],
            "posts": [self.posts[k].to_record() for k in sorted(self.posts)],
            "matches": [
                {
                    "platform": k[0],
                    "post_id": k[1],
                    "logics": sorted(self.matches[k].logics),
                    "matched_selectors": sorted(self.matches[k].matched_selectors),
                }
                for k in sorted(self.matches)
            ],
            "engagement_snapshots": [
                snap.to_record()
                for k in sorted(self.engagement)
                for snap in self.engagement[k]
            ],
            "follower_snapshots": [
                self.follower_snapshots[k].to_record() for k in sorted(self.follower_snapshots)
            ],
        }

    def canonical_bytes(self) -> bytes:
        blob = json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return blob.encode("utf-8") + b"\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.canonical_bytes())

    @classmethod
    def load(cls, path: str | Path, registry: Registry) -> "Store":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if data.get("format") != "store/1":
            raise StoreVersionError(f"unknown store format {data.get('format')!r}")
        store = cls(registry)
        if data["registry_version"] != store.registry_version:
            raise StoreVersionError("store was built against a different registry version")
        if data["selector_version"] != store.selector_version:
            raise StoreVersionError("store was built against a different selector version")
        for rec in data["posts"]:
            store.posts[(rec["platform"], str(rec["post_id"]))] = Post.from_record(rec)
        for rec in data["matches"]:
            key = (rec["platform"], str(rec["post_id"]))
            store.matches[key] = MatchResult(
                key[1], key[0], frozenset(rec["logics"]), frozenset(rec["matched_selectors"])
            )
        for rec in data["engagement_snapshots"]:
            store.engagement.setdefault((rec["platform"], rec["post_id"]), []).append(
                EngagementSnapshot(
                    post_id=rec["post_id"],
                    platform=rec["platform"],
                    captured_at=parse_instant(rec["captured_at"]),
                    likes=rec["likes"],
                    comments=rec["comments"],
                    shares=rec["shares"],
                    comment_items=tuple(Post.from_record(p) for p in rec["comment_items"]),
                )
            )
        for rec in data["follower_snapshots"]:
            snap = FollowerSnapshot(
                rec["account_id"], parse_instant(rec["captured_at"]), frozenset(rec["follower_ids"])
            )
            store.follower_snapshots[(snap.account_id, rec["captured_at"])] = snap
        return store


def merge(a: Store, b: Store) -> Store:
    """Commutative, associative, idempotent union of two stores."""
    if (a.registry_version, a.selector_version) != (b.registry_version, b.selector_version):
        raise StoreVersionError("stores were collected against different registry/selector versions")
    out = Store(a.registry, a.compiled)
    for src in (a, b):
        for key, post in src.posts.items():
            existing = out.posts.get(key)
            if existing is None:
                out.posts[key] = post
                out.matches[key] = src.matches[key]
            else:
                # order-independent tie-break keeps merge commutative
                if post.to_record() != existing.to_record():
                    log.info("conflicting copies of %s/%s during merge", *key)
                    if json.dumps(post.to_record(), sort_keys=True) < json.dumps(existing.to_record(), sort_keys=True):
                        out.posts[key] = post
                out.matches[key] = union_matches(out.matches[key], src.matches[key])
        for key, snaps in src.engagement.items():
            bucket = out.engagement.setdefault(key, [])
            for snap in snaps:
                if not any(s.captured_at == snap.captured_at for s in bucket):
                    bucket.append(snap)
            bucket.sort(key=lambda s: s.captured_at)
        for key, snap in src.follower_snapshots.items():
            out.follower_snapshots.setdefault(key, snap)
        out.ingestion_log.extend(src.ingestion_log)
    return out


# --- post sources ---------------------------------------------------------


class SourceDisconnected(RuntimeError):
    """A live source dropped; the collector records a resume checkpoint."""


class PostSource(Protocol):
    source_id: str

    def __iter__(self) -> Iterator[Post]: ...


@dataclass
class ReplaySource:
    """Replays the newline-delimited archive format in file order.

    Records later deleted at the platform still replay: the stream saw
    them live. Malformed lines are skipped and counted.
    """

    path: str | Path
    source_id: str = ""
    start_after: datetime | None = None
    skipped: int = 0

    def __post_init__(self) -> None:
        if not self.source_id:
            self.source_id = Path(self.path).name

    def __iter__(self) -> Iterator[Post]:
        self.skipped = 0
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    post = Post.from_record(rec)
                except (ValueError, KeyError) as exc:
                    self.skipped += 1
                    log.warning("%s:%d: skipping malformed record (%s)", self.path, lineno, exc)
                    continue
                if self.start_after is not None and post.created_at < self.start_after:
                    continue
                yield post


@dataclass
class ListSource:
    posts: Sequence[Post]
    source_id: str = "list"
    start_after: datetime | None = None

    def __iter__(self) -> Iterator[Post]:
        for post in self.posts:
            if self.start_after is not None and post.created_at < self.start_after:
                continue
            yield post


@dataclass
class CollectorReport:
    source_id: str
    received: int = 0
    matched: int = 0
    duplicates: int = 0
    skipped: int = 0
    checkpoint: datetime | None = None
    disconnected: bool = False

    def to_json_line(self) -> str:
        rec = {
            "source_id": self.source_id,
            "received": self.received,
            "matched": self.matched,
            "duplicates": self.duplicates,
            "skipped": self.skipped,
            "checkpoint": format_instant(self.checkpoint) if self.checkpoint else None,
            "disconnected": self.disconnected,
        }
        return json.dumps(rec, sort_keys=True, ensure_ascii=False)


def run_collector(
    source: PostSource,
    registry: Registry,
    cs: CompiledSelectors,
    sink: Store,
) -> CollectorReport:
    """Feed one time-ordered source through classify into the store."""
    report = CollectorReport(source_id=getattr(source, "source_id", "source"))
    since_checkpoint = 0
    try:
        for post in source:
            report.received += 1
            since_checkpoint += 1
            match = classify(post, registry, cs)
            if match.in_space:
                report.matched += 1
                if sink.upsert(post, match):
                    report.duplicates += 1
            # checkpoint every 1,000 posts or 5 stream-seconds, whichever first
            if (
                report.checkpoint is None
                or since_checkpoint >= CHECKPOINT_EVERY_POSTS
                or post.created_at - report.checkpoint >= CHECKPOINT_EVERY
            ):
                report.checkpoint = post.created_at
                since_checkpoint = 0
    except SourceDisconnected:
        report.disconnected = True
    report.skipped = getattr(source, "skipped", 0)
    sink.ingestion_log.append(
        {
            "source_id": report.source_id,
            "received": report.received,
            "duplicates": report.duplicates,
        }
    )
    return report


# --- ex-post keyword backfill ---------------------------------------------


class ArchiveUnavailable(RuntimeError):
    pass


class ArchiveSource(Protocol):
    """Ex-post archive access: deleted posts are gone here."""

    def search_originals(self, cs: CompiledSelectors) -> list[Post]: ...

    def retweets_of(self, post_id: str) -> list[Post]: ...


@dataclass
class BackfillReport:
    keywords: list[str]
    originals: int = 0
    retweets_fetched: int = 0
    retweets_truncated: int = 0
    resume_cursor: str | None = None

    def to_json_line(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True, ensure_ascii=False)


def backfill(
    keywords: Sequence[Selector],
    archive: ArchiveSource,
    cap: int,
    registry: Registry,
    cs: CompiledSelectors,
    sink: Store,
) -> BackfillReport:
    """Scrape keyword-matching originals from an archive plus up to ``cap``
    retweets each.

    Backfill keywords may be ones the live collection missed, so stored
    provenance is the registry classification unioned with a topic match
    on the backfill keywords themselves.
    """
    report = BackfillReport(keywords=[k.text for k in keywords])
    kw_compiled = compile_selectors(list(keywords))

    def ingest(post: Post, kw_hits: set[str]) -> None:
        match = classify(post, registry, cs)
        if kw_hits:
            extra = MatchResult(post.post_id, post.platform, frozenset({"topic"}), frozenset(kw_hits))
            match = union_matches(match, extra)
        sink.upsert(post, match)

    try:
        originals = archive.search_originals(kw_compiled)
    except ArchiveUnavailable:
        report.resume_cursor = "originals:0"
        return report
    for idx, original in enumerate(sorted(originals, key=lambda p: (p.created_at, p.post_id))):
        hits = match_text(original.text, kw_compiled, "collection")
        ingest(original, hits)
        report.originals += 1
        try:
            retweets = archive.retweets_of(original.post_id)
        except ArchiveUnavailable:
            report.resume_cursor = f"originals:{idx + 1}"
            return report
        retweets = sorted(retweets, key=lambda p: (p.created_at, p.post_id))
        for rt in retweets[:cap]:
            rt_hits = match_text(rt.text, kw_compiled, "collection")
            ingest(rt, rt_hits)
            report.retweets_fetched += 1
        report.retweets_truncated += max(0, len(retweets) - cap)
    return report


# --- follower snapshots -----------------------------------------------------


class GraphSource(Protocol):
    def followers_of(self, account) -> set[int] | None: ...


def snapshot_followers(accounts: Iterable, graph: GraphSource, at: datetime, sink: Store) -> int:
    """Stamp one follower snapshot per resolvable account; returns edges."""
    edges = 0
    for account in accounts:
        followers = graph.followers_of(account)
        if followers is None:
            log.warning("cannot resolve followers of %s; skipped", account.account_id)
            continue
        sink.add_follower_snapshot(FollowerSnapshot(account.account_id, at, frozenset(followers)))
        edges += len(followers)
    return edges
