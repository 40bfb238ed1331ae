"""Dataset manifests: export post-ID lists, rebuild stores from archives.

Raw platform content cannot be redistributed, so a dataset is shared as
its reconstruction recipe: the list of tweet IDs, the account master
lists (Facebook is rebuilt account-based) and the selector lists. Anyone
hydrating the manifest later inherits whatever the platform has deleted
in the meantime; the MissingReport quantifies that loss.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable

from .ingest import Store
from .model import Registry, format_instant, load_registry_dir, parse_instant, save_registry
from .selectors import classify

FORMAT_VERSION = "btw17-manifest/1"


class ManifestError(ValueError):
    pass


class HydrationArchive:
    """What hydrate() needs from an archive; SimArchive satisfies it."""

    def resolve(self, platform: str, post_id: str):  # pragma: no cover - protocol
        raise NotImplementedError

    def posts_by_accounts(self, platform: str, handles: Iterable[str]):  # pragma: no cover
        raise NotImplementedError


@dataclass
class DatasetManifest:
    directory: Path
    format_version: str
    collection_period: tuple[datetime, datetime]
    twitter_post_ids: list[str]

    def registry(self) -> Registry:
        return load_registry_dir(self.directory, self.collection_period)


def export_manifest(store: Store, registry: Registry, directory: str | Path) -> DatasetManifest:
    """Write a reconstruction package: tweet IDs + master lists + metadata."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    ids = [post_id for platform, post_id in store.posts if platform == "twitter"]
    for post_id in ids:
        if not post_id.isdigit():
            raise ManifestError(f"twitter post id {post_id!r} is not a decimal id")
    ids = sorted(set(ids), key=int)
    (directory / "tweet_ids.txt").write_text("".join(i + "\n" for i in ids), encoding="utf-8")

    save_registry(registry, directory)

    start, end = registry.collection_period
    meta = {
        "format_version": FORMAT_VERSION,
        "collection_period": {"start": format_instant(start), "end": format_instant(end)},
        "counts": {"twitter_post_ids": len(ids), "accounts": len(registry.accounts)},
    }
    (directory / "manifest.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return DatasetManifest(directory, FORMAT_VERSION, registry.collection_period, ids)


def load_manifest(directory: str | Path) -> DatasetManifest:
    directory = Path(directory)
    meta_path = directory / "manifest.json"
    if not meta_path.exists():
        raise ManifestError(f"{directory} has no manifest.json")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    version = meta.get("format_version")
    if version != FORMAT_VERSION:
        raise ManifestError(f"unsupported manifest version {version!r}")
    period = (
        parse_instant(meta["collection_period"]["start"]),
        parse_instant(meta["collection_period"]["end"]),
    )
    ids = [line.strip() for line in (directory / "tweet_ids.txt").read_text(encoding="utf-8").splitlines() if line.strip()]
    previous = None
    for post_id in ids:
        if not post_id.isdigit():
            raise ManifestError(f"non-decimal tweet id {post_id!r}")
        if previous is not None and int(post_id) <= previous:
            raise ManifestError("tweet ids must be unique and sorted ascending")
        previous = int(post_id)
    return DatasetManifest(directory, version, period, ids)


@dataclass
class MissingReport:
    total_ids: int
    missing_ids: list[str] = field(default_factory=list)
    resume_cursor: int | None = None

    @property
    def fraction(self) -> float:
        return len(self.missing_ids) / self.total_ids if self.total_ids else 0.0

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "total_ids": self.total_ids,
                "missing": len(self.missing_ids),
                "fraction": self.fraction,
                "resume_cursor": self.resume_cursor,
            },
            sort_keys=True,
        )


def hydrate(
    manifest: DatasetManifest,
    archive: HydrationArchive,
    resume_from: int = 0,
) -> tuple[Store, MissingReport]:
    """Rebuild a store: tweet IDs re-fetched one by one, Facebook rebuilt
    from the manifest's account list. Logics are recomputed via classify.
    """
    registry = manifest.registry()
    store = Store(registry)
    report = MissingReport(total_ids=len(manifest.twitter_post_ids))

    for index, post_id in enumerate(manifest.twitter_post_ids):
        if index < resume_from:
            continue
        try:
            post = archive.resolve("twitter", post_id)
        except Exception:  # noqa: BLE001 - archive outage: report a resume point
            report.resume_cursor = index
            return store, report
        if post is None:
            report.missing_ids.append(post_id)
            continue
        store.upsert(post, classify(post, registry, store.compiled))

    fb_handles = [a.handle for a in registry.accounts if a.platform == "facebook"]
    for post in archive.posts_by_accounts("facebook", fb_handles):
        store.upsert(post, classify(post, registry, store.compiled))
    return store, report


def missing_by_class(
    manifest: DatasetManifest, report: MissingReport, exporting_store: Store
) -> dict[str, float]:
    """Missing fractions split into actor posts vs user-generated content.

    Only the exporting side can classify a deleted id (the post itself is
    gone from the archive), so the split is computed against the original
    store's author information.
    """
    registry = exporting_store.registry
    totals: Counter = Counter()
    missing: Counter = Counter()
    missing_set = set(report.missing_ids)
    for post_id in manifest.twitter_post_ids:
        post = exporting_store.posts.get(("twitter", post_id))
        if post is None:
            continue
        account = registry.account_for("twitter", post.author_handle, post.author_id)
        cls = "actor_posts" if account is not None else "user_content"
        totals[cls] += 1
        if post_id in missing_set:
            missing[cls] += 1
    return {cls: missing[cls] / totals[cls] for cls in totals}
