"""Synthetic global traffic with full ground truth.

The generator produces a deterministic, seeded stream of posts around a
registry: actor posts by registered accounts, user engagement (retweets,
@-mentions), topic-keyword posts and plain noise in several languages,
including the classic ambiguous tokens ("fdp" in French, "gabriel" in
Spanish, "özdemir" in Turkish). Ground truth records per-post language,
relevance, deletion time and engagement arrival times, so collection
bias (rate caps, rolling windows, deletions) can be measured exactly.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .ingest import Post
from .model import DEFAULT_PERIOD, Registry, format_instant, parse_instant
from .selectors import CompiledSelectors, classify, compile_selectors, match_text, tokenize

_FILLERS = {
    "de": [
        "heute", "morgen", "wieder", "einfach", "gerade", "wetter", "kaffee",
        "zug", "stadt", "musik", "spiel", "abend", "danke", "schön", "neu",
    ],
    "en": [
        "today", "again", "really", "coffee", "train", "city", "music",
        "game", "evening", "thanks", "nice", "new", "weather",
    ],
    "fr": [
        "aujourd'hui", "encore", "vraiment", "café", "train", "ville",
        "musique", "quel", "fdp", "soir", "merci", "nouveau",
    ],
    "es": [
        "hoy", "otra", "vez", "café", "tren", "ciudad", "música", "gabriel",
        "garcía", "noche", "gracias", "nuevo",
    ],
    "tr": [
        "bugün", "yine", "gerçekten", "kahve", "tren", "şehir", "müzik",
        "akşam", "teşekkürler", "yeni", "güzel",
    ],
}

_NEUTRAL_HASHTAGS = ["#wetter", "#musik", "#kaffee", "#reisen", "#sport"]


@dataclass
class SimParams:
    """Generation knobs; defaults give a small mixed-language stream."""

    n_posts: int = 10_000
    period_start: datetime = DEFAULT_PERIOD[0]
    duration: timedelta = timedelta(days=7)
    twitter_share: float = 0.8
    relevant_fraction: float = 0.1
    w_actor_post: float = 0.3
    w_retweet: float = 0.2
    w_mention: float = 0.2
    w_topic: float = 0.3
    language_mix: tuple = (("de", 0.70), ("en", 0.10), ("fr", 0.08), ("es", 0.06), ("tr", 0.06))
    interface_foreign_rate: float = 0.15
    foreign_interface_de_rate: float = 0.03
    detected_error_rate: float = 0.0
    deletion_rate_user_content: float = 0.0
    deletion_rate_actor_posts: float = 0.0
    engagement_mean: float = 0.0
    engagement_late_fraction: float = 0.05
    engagement_window_days: float = 8.0
    engagement_late_max_days: float = 25.0
    engagement_deletion_rate: float = 0.0
    followers_mean: int = 40
    follower_edges_total: int | None = None
    follower_churn: float = 0.1
    spikes: tuple = ()  # ((position_fraction, post_share), ...)

    def validate(self) -> None:
        if self.n_posts < 0:
            raise ValueError("n_posts must be >= 0")
        if self.duration <= timedelta(0):
            raise ValueError("duration must be positive")
        for name in (
            "twitter_share",
            "relevant_fraction",
            "interface_foreign_rate",
            "foreign_interface_de_rate",
            "detected_error_rate",
            "deletion_rate_user_content",
            "deletion_rate_actor_posts",
            "engagement_late_fraction",
            "engagement_deletion_rate",
            "follower_churn",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        weights = (self.w_actor_post, self.w_retweet, self.w_mention, self.w_topic)
        if min(weights) < 0 or sum(weights) <= 0:
            raise ValueError("relevance construction weights must be non-negative and not all zero")
        if sum(share for _, share in self.spikes) >= 1.0:
            raise ValueError("spike shares must sum to < 1")

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["period_start"] = format_instant(self.period_start)
        out["duration_seconds"] = self.duration.total_seconds()
        del out["duration"]
        out["language_mix"] = [list(pair) for pair in self.language_mix]
        out["spikes"] = [list(pair) for pair in self.spikes]
        return out


@dataclass(frozen=True)
class EngagementEvent:
    kind: str
    at: datetime
    deleted_at: datetime | None = None


@dataclass(frozen=True)
class PostTruth:
    true_language: str
    is_relevant: bool
    author_class: str  # "actor" | "user"
    deletion_at: datetime | None
    created_at: datetime


@dataclass
class GroundTruth:
    seed: int
    params: dict
    posts: dict[tuple[str, str], PostTruth] = field(default_factory=dict)
    engagement: dict[tuple[str, str], list[EngagementEvent]] = field(default_factory=dict)
    follower_graph: dict[str, frozenset[int]] = field(default_factory=dict)
    follower_graph_later: dict[str, frozenset[int]] = field(default_factory=dict)

    def relevant_keys(self) -> set[tuple[str, str]]:
        return {k for k, t in self.posts.items() if t.is_relevant}


def _safe_words(words: Iterable[str], cs: CompiledSelectors) -> list[str]:
    """Filler words that cannot collection-match any selector.

    Single-word matches are dropped outright ("özdemir" can only appear
    via a deliberate topic insertion); ambiguous phrase words such as
    "gabriel" stay as long as the full phrase cannot assemble itself
    from the remaining vocabulary.
    """
    safe = [w for w in words if tokenize(w) and not match_text(w, cs, "collection")]
    vocab = {tokenize(w)[0].lstrip("#@") for w in safe}
    for lists in cs.phrase_index.values():
        for parts, _ in lists:
            while all(p in vocab for p in parts):
                victim = parts[0]
                vocab.discard(victim)
                safe = [w for w in safe if tokenize(w)[0].lstrip("#@") != victim]
    return safe


def _render_selector(sel) -> str:
    return sel.text


def _weighted_choice(rng: random.Random, pairs: Sequence[tuple[str, float]]) -> str:
    total = sum(w for _, w in pairs)
    u = rng.random() * total
    acc = 0.0
    for value, w in pairs:
        acc += w
        if u < acc:
            return value
    return pairs[-1][0]


def generate(registry: Registry, params: SimParams, seed: int) -> tuple[list[Post], GroundTruth]:
    """Deterministic traffic + ground truth for one seed."""
    params.validate()
    rng = random.Random(seed)
    cs = compile_selectors(registry.selectors)
    truth = GroundTruth(seed=seed, params=params.to_dict())

    for account in registry.accounts:
        # synthetic authors are named user<N>; a colliding registry handle
        # would silently turn noise posts into actor posts
        if re.fullmatch(r"user\d+", account.handle.lower()):
            raise ValueError(f"registry handle {account.handle!r} collides with synthetic authors")

    tw_actors = [a for a in registry.accounts if a.platform == "twitter"]
    fb_actors = [a for a in registry.accounts if a.platform == "facebook"]
    mentionable = tw_actors
    selectors = list(registry.selectors)
    fillers = {lang: _safe_words(words, cs) or ["xq"] for lang, words in _FILLERS.items()}
    neutral_tags = _safe_words(_NEUTRAL_HASHTAGS, cs)

    construction_weights = [
        ("actor", params.w_actor_post),
        ("retweet", params.w_retweet if tw_actors else 0.0),
        ("mention", params.w_mention if mentionable else 0.0),
        ("topic", params.w_topic if selectors else 0.0),
    ]
    if sum(w for _, w in construction_weights) == 0:
        raise ValueError("registry offers no way to construct relevant posts")

    duration_s = int(params.duration.total_seconds())
    offsets = []
    for _ in range(params.n_posts):
        u = rng.random()
        acc = 0.0
        offset = None
        for frac, share in params.spikes:
            acc += share
            if u < acc:
                center = frac * duration_s
                offset = min(max(int(center + rng.uniform(-90, 90)), 0), duration_s)
                break
        if offset is None:
            offset = rng.randrange(duration_s)
        offsets.append(offset)
    offsets.sort()

    posts: list[Post] = []
    actor_tweets: list[Post] = []
    tweet_seq = 10**17
    fb_seq = 1
    window = timedelta(days=params.engagement_window_days)

    for offset in offsets:
        created = params.period_start + timedelta(seconds=offset)
        relevant = rng.random() < params.relevant_fraction
        lang = _weighted_choice(rng, params.language_mix)
        words = [rng.choice(fillers[lang]) for _ in range(rng.randint(3, 6))]

        platform = "twitter"
        kind = "original"
        author_handle = f"user{rng.randrange(1_000_000)}"
        author_id = None
        author_class = "user"
        referenced_post_id = None
        referenced_author_handle = None
        mentioned: list[str] = []

        if relevant:
            how = _weighted_choice(rng, construction_weights)
            if how == "retweet" and not actor_tweets:
                how = "mention" if mentionable else "topic"
            if how == "actor":
                platform = "twitter" if (rng.random() < params.twitter_share or not fb_actors) else "facebook"
                pool = tw_actors if platform == "twitter" else fb_actors
                account = rng.choice(pool)
                author_handle = account.handle
                author_id = account.external_numeric_id
                author_class = "actor"
                kind = "page_post" if platform == "facebook" else "original"
                lang = "de"
                words = [rng.choice(fillers["de"]) for _ in range(rng.randint(3, 6))]
            elif how == "retweet":
                ref = actor_tweets[rng.randrange(len(actor_tweets))]
                kind = "retweet"
                referenced_post_id = ref.post_id
                referenced_author_handle = ref.author_handle
                words = ["rt", f"@{ref.author_handle}"] + words
            elif how == "mention":
                target = rng.choice(mentionable)
                mentioned = [target.handle]
                words.insert(rng.randrange(len(words) + 1), f"@{target.handle}")
            else:  # topic
                sel = rng.choice(selectors)
                words.insert(rng.randrange(len(words) + 1), _render_selector(sel))
        elif neutral_tags and rng.random() < 0.15:
            words.insert(rng.randrange(len(words) + 1), rng.choice(neutral_tags))

        if platform == "twitter":
            post_id = str(tweet_seq)
            tweet_seq += 1
        else:
            post_id = f"fbp{fb_seq}"
            fb_seq += 1

        detected = lang
        if params.detected_error_rate and rng.random() < params.detected_error_rate:
            detected = rng.choice([code for code, _ in params.language_mix if code != lang])
        if author_class == "actor":
            interface = "de"
        elif lang == "de":
            interface = "en" if rng.random() < params.interface_foreign_rate else "de"
        else:
            interface = "de" if rng.random() < params.foreign_interface_de_rate else lang

        text = " ".join(words)
        post = Post(
            post_id=post_id,
            platform=platform,
            author_handle=author_handle,
            author_id=author_id,
            created_at=created,
            text=text,
            kind=kind,
            referenced_post_id=referenced_post_id,
            referenced_author_handle=referenced_author_handle,
            mentioned_handles=mentioned,
            hashtags=[w[1:] for w in words if w.startswith("#")],
            detected_lang=detected,
            interface_lang=interface,
        )
        posts.append(post)
        if platform == "twitter" and author_class == "actor":
            actor_tweets.append(post)

        deletion_rate = (
            params.deletion_rate_actor_posts if author_class == "actor" else params.deletion_rate_user_content
        )
        deletion_at = None
        if deletion_rate and rng.random() < deletion_rate:
            deletion_at = created + timedelta(seconds=rng.randint(3600, max(7200, duration_s)))
        truth.posts[post.key] = PostTruth(lang, relevant, author_class, deletion_at, created)

        if params.engagement_mean and kind == "page_post":
            count = int(rng.expovariate(1.0 / params.engagement_mean))
            events = []
            due = created + window
            for _ in range(count):
                ekind = _weighted_choice(rng, (("like", 0.7), ("comment", 0.2), ("share", 0.1)))
                if rng.random() < params.engagement_late_fraction:
                    at = created + timedelta(
                        seconds=rng.uniform(
                            window.total_seconds(),
                            params.engagement_late_max_days * 86400,
                        )
                    )
                else:
                    at = created + timedelta(seconds=rng.uniform(0, window.total_seconds()))
                deleted_at = None
                if (
                    params.engagement_deletion_rate
                    and at <= due
                    and rng.random() < params.engagement_deletion_rate
                ):
                    remaining = (due - at).total_seconds()
                    deleted_at = at + timedelta(seconds=rng.uniform(0, remaining))
                events.append(EngagementEvent(ekind, at, deleted_at))
            if events:
                truth.engagement[post.key] = sorted(events, key=lambda e: e.at)

    # follower graphs for the twitter accounts
    n_tw = len(tw_actors)
    for idx, account in enumerate(tw_actors):
        if params.follower_edges_total is not None:
            count = params.follower_edges_total // n_tw + (1 if idx < params.follower_edges_total % n_tw else 0)
        else:
            count = rng.randint(params.followers_mean // 2, params.followers_mean * 2)
        base = frozenset(rng.sample(range(10_000_000), count)) if count else frozenset()
        truth.follower_graph[account.account_id] = base
        churned = {f for f in base if rng.random() > params.follower_churn / 2}
        additions = rng.sample(range(10_000_000, 20_000_000), int(count * params.follower_churn / 2))
        truth.follower_graph_later[account.account_id] = frozenset(churned) | frozenset(additions)

    return posts, truth


# --- serialization ----------------------------------------------------------


def write_traffic(posts: Sequence[Post], truth: GroundTruth, path: str | Path) -> None:
    """Write the replay archive; deleted posts carry their deletion time."""
    with open(path, "w", encoding="utf-8") as fh:
        for post in posts:
            rec = post.to_record()
            deletion = truth.posts[post.key].deletion_at if post.key in truth.posts else None
            if deletion is not None:
                rec["deleted_at"] = format_instant(deletion)
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":"), ensure_ascii=False))
            fh.write("\n")


def write_ground_truth(truth: GroundTruth, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        meta = {
            "record": "meta",
            "seed": truth.seed,
            "params": truth.params,
            "follower_graph": {k: sorted(v) for k, v in sorted(truth.follower_graph.items())},
            "follower_graph_later": {k: sorted(v) for k, v in sorted(truth.follower_graph_later.items())},
        }
        fh.write(json.dumps(meta, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n")
        for key in sorted(truth.posts):
            t = truth.posts[key]
            rec = {
                "record": "post",
                "platform": key[0],
                "post_id": key[1],
                "true_language": t.true_language,
                "is_relevant": t.is_relevant,
                "author_class": t.author_class,
                "deletion_at": format_instant(t.deletion_at) if t.deletion_at else None,
                "created_at": format_instant(t.created_at),
                "events": [
                    {
                        "kind": e.kind,
                        "at": format_instant(e.at),
                        "deleted_at": format_instant(e.deleted_at) if e.deleted_at else None,
                    }
                    for e in truth.engagement.get(key, [])
                ],
            }
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n")


def load_ground_truth(path: str | Path) -> GroundTruth:
    truth: GroundTruth | None = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            if rec["record"] == "meta":
                truth = GroundTruth(seed=rec["seed"], params=rec["params"])
                truth.follower_graph = {k: frozenset(v) for k, v in rec["follower_graph"].items()}
                truth.follower_graph_later = {
                    k: frozenset(v) for k, v in rec["follower_graph_later"].items()
                }
            else:
                assert truth is not None, "meta record must come first"
                key = (rec["platform"], rec["post_id"])
                truth.posts[key] = PostTruth(
                    rec["true_language"],
                    rec["is_relevant"],
                    rec["author_class"],
                    parse_instant(rec["deletion_at"]) if rec["deletion_at"] else None,
                    parse_instant(rec["created_at"]),
                )
                events = [
                    EngagementEvent(
                        e["kind"],
                        parse_instant(e["at"]),
                        parse_instant(e["deleted_at"]) if e["deleted_at"] else None,
                    )
                    for e in rec["events"]
                ]
                if events:
                    truth.engagement[key] = events
    if truth is None:
        raise ValueError(f"{path}: no meta record")
    return truth


# --- platform access models --------------------------------------------------


class SimArchive:
    """Ex-post archive view: deleted posts are unavailable."""

    def __init__(self, posts: Iterable[Post], deletions: dict[tuple[str, str], datetime | None] | None = None):
        self._posts: dict[tuple[str, str], Post] = {p.key: p for p in posts}
        self._deleted: set[tuple[str, str]] = {
            k for k, at in (deletions or {}).items() if at is not None
        }

    @classmethod
    def from_truth(cls, posts: Iterable[Post], truth: GroundTruth) -> "SimArchive":
        return cls(posts, {k: t.deletion_at for k, t in truth.posts.items()})

    @classmethod
    def from_ndjson(cls, path: str | Path) -> "SimArchive":
        posts = []
        deletions: dict[tuple[str, str], datetime | None] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                post = Post.from_record(rec)
                posts.append(post)
                if rec.get("deleted_at"):
                    deletions[post.key] = parse_instant(rec["deleted_at"])
        return cls(posts, deletions)

    def available(self, key: tuple[str, str]) -> bool:
        return key in self._posts and key not in self._deleted

    def resolve(self, platform: str, post_id: str) -> Post | None:
        key = (platform, post_id)
        return self._posts[key] if self.available(key) else None

    def search_originals(self, kw_compiled: CompiledSelectors) -> list[Post]:
        """Keyword search over the web-interface view: retweets excluded."""
        out = []
        for key, post in self._posts.items():
            if post.platform != "twitter" or post.kind == "retweet" or key in self._deleted:
                continue
            if match_text(post.text, kw_compiled, "collection"):
                out.append(post)
        return sorted(out, key=lambda p: (p.created_at, p.post_id))

    def retweets_of(self, post_id: str) -> list[Post]:
        out = [
            post
            for key, post in self._posts.items()
            if post.kind == "retweet" and post.referenced_post_id == post_id and key not in self._deleted
        ]
        return sorted(out, key=lambda p: (p.created_at, p.post_id))

    def posts_by_accounts(self, platform: str, handles: Iterable[str]) -> list[Post]:
        wanted = {h.lower() for h in handles}
        out = [
            post
            for key, post in self._posts.items()
            if post.platform == platform and post.author_handle.lower() in wanted and key not in self._deleted
        ]
        return sorted(out, key=lambda p: (p.created_at, p.post_id))


class SimEngagementSource:
    """Engagement counts as the platform would report them at time t."""

    def __init__(self, truth: GroundTruth, include_comment_items: bool = False):
        self._truth = truth
        self._include_items = include_comment_items

    def fetch(self, key: tuple[str, str], at: datetime) -> tuple[int, int, int, tuple]:
        likes = comments = shares = 0
        items: list[Post] = []
        for idx, event in enumerate(self._truth.engagement.get(key, [])):
            if event.at > at or (event.deleted_at is not None and event.deleted_at <= at):
                continue
            if event.kind == "like":
                likes += 1
            elif event.kind == "share":
                shares += 1
            else:
                comments += 1
                if self._include_items:
                    items.append(
                        Post(
                            post_id=f"{key[1]}c{idx}",
                            platform=key[0],
                            author_handle=f"commenter{idx}",
                            created_at=event.at,
                            text="",
                            kind="comment",
                            referenced_post_id=key[1],
                        )
                    )
        return likes, comments, shares, tuple(items)


class SimGraphSource:
    def __init__(self, graph: dict[str, frozenset[int]]):
        self._graph = graph

    def followers_of(self, account) -> set[int] | None:
        followers = self._graph.get(account.account_id)
        return set(followers) if followers is not None else None


# --- rate cap ----------------------------------------------------------------


@dataclass
class CapModel:
    """The public streaming interface's share-of-global-traffic limit."""

    cap_fraction: float = 0.01
    window: timedelta = timedelta(minutes=1)

    def __post_init__(self) -> None:
        if not 0.0 < self.cap_fraction <= 1.0:
            raise ValueError("cap_fraction must lie in (0, 1]")
        if self.window <= timedelta(0):
            raise ValueError("window must be positive")


@dataclass
class WindowCoverage:
    window_start: datetime
    traffic: int
    matched: int
    delivered: int

    @property
    def coverage(self) -> float:
        return self.delivered / self.matched if self.matched else 1.0


@dataclass
class CoverageReport:
    windows: list[WindowCoverage]

    @property
    def total_matched(self) -> int:
        return sum(w.matched for w in self.windows)

    @property
    def total_delivered(self) -> int:
        return sum(w.delivered for w in self.windows)

    @property
    def overall_coverage(self) -> float:
        matched = self.total_matched
        return self.total_delivered / matched if matched else 1.0


def apply_cap(
    traffic: Sequence[Post],
    registry: Registry,
    cs: CompiledSelectors,
    cap: CapModel,
    seed: int = 0,
) -> tuple[list[Post], CoverageReport]:
    """Deliver matched posts up to the per-window cap.

    Beyond the cap, delivery drops uniformly at random (seeded); the real
    platform's drop policy is undocumented, so uniform is a modeling
    assumption, not a claim.
    """
    rng = random.Random(seed)
    wsec = int(cap.window.total_seconds())
    buckets: dict[int, list[Post]] = {}
    totals: dict[int, int] = {}
    for post in traffic:
        wkey = int(post.created_at.timestamp()) // wsec
        totals[wkey] = totals.get(wkey, 0) + 1
        if classify(post, registry, cs).in_space:
            buckets.setdefault(wkey, []).append(post)

    delivered: list[Post] = []
    windows: list[WindowCoverage] = []
    for wkey in sorted(totals):
        matched = buckets.get(wkey, [])
        limit = cap.cap_fraction * totals[wkey]
        if len(matched) <= limit:
            chosen = list(matched)
        else:
            chosen = rng.sample(matched, int(limit))
            chosen.sort(key=lambda p: (p.created_at, p.post_id))
        delivered.extend(chosen)
        windows.append(
            WindowCoverage(
                window_start=datetime.fromtimestamp(wkey * wsec, tz=timezone.utc),
                traffic=totals[wkey],
                matched=len(matched),
                delivered=len(chosen),
            )
        )
    return delivered, CoverageReport(windows)
