from __future__ import annotations

import json
import random
from datetime import datetime, timezone

import pytest

from polcomm.ingest import Store
from polcomm.sharing import (
    FORMAT_VERSION,
    ManifestError,
    export_manifest,
    hydrate,
    load_manifest,
    missing_by_class,
)
from polcomm.simulator import SimArchive, SimParams, generate

from .conftest import build_store, make_post


def _sim_store(registry, compiled, seed=61, n=2000, **kwargs):
    params = SimParams(n_posts=n, relevant_fraction=0.4, twitter_share=0.7, **kwargs)
    posts, truth = generate(registry, params, seed=seed)
    return posts, truth, build_store(registry, posts, compiled)


def test_manifest_lists_twitter_ids_once(tmp_path, registry, compiled):
    posts = [
        make_post("3", "afd eins"),
        make_post("1", "afd zwei"),
        make_post("2", "afd drei"),
        make_post("10", "seite", platform="facebook", author="CDU", kind="page_post"),
        make_post("11", "seite zwei", platform="facebook", author="CDU", kind="page_post"),
    ]
    # facebook ids are arbitrary strings; twitter ids must be decimal
    posts[3].post_id = "fbp10"
    posts[4].post_id = "fbp11"
    store = build_store(registry, posts, compiled)
    manifest = export_manifest(store, registry, tmp_path / "m")
    assert manifest.twitter_post_ids == ["1", "2", "3"]
    content = (tmp_path / "m" / "tweet_ids.txt").read_text(encoding="utf-8")
    assert content == "1\n2\n3\n"
    assert (tmp_path / "m" / "accounts.csv").exists()
    assert (tmp_path / "m" / "candidates.csv").exists()
    assert (tmp_path / "m" / "selectors_parties.txt").exists()
    meta = json.loads((tmp_path / "m" / "manifest.json").read_text(encoding="utf-8"))
    assert meta["format_version"] == FORMAT_VERSION


def test_empty_store_gives_valid_manifest(tmp_path, registry, compiled):
    manifest = export_manifest(Store(registry, compiled), registry, tmp_path / "m")
    assert manifest.twitter_post_ids == []
    again = load_manifest(tmp_path / "m")
    assert again.twitter_post_ids == []


def test_unknown_manifest_version_rejected(tmp_path, registry, compiled):
    export_manifest(Store(registry, compiled), registry, tmp_path / "m")
    meta_path = tmp_path / "m" / "manifest.json"
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    meta["format_version"] = "btw17-manifest/99"
    meta_path.write_text(json.dumps(meta), encoding="utf-8")
    with pytest.raises(ManifestError, match="version"):
        load_manifest(tmp_path / "m")


def test_ids_sorted_numerically(tmp_path, registry, compiled):
    posts = [make_post(str(i), "afd") for i in (9, 10, 100, 2)]
    store = build_store(registry, posts, compiled)
    manifest = export_manifest(store, registry, tmp_path / "m")
    assert manifest.twitter_post_ids == ["2", "9", "10", "100"]


def test_hydration_lossless_roundtrip(tmp_path, registry, compiled):
    posts, truth, store = _sim_store(registry, compiled)
    manifest = export_manifest(store, registry, tmp_path / "m")
    archive = SimArchive(posts)  # lossless: no deletions applied
    hydrated, report = hydrate(load_manifest(tmp_path / "m"), archive)
    assert report.fraction == 0.0
    assert report.missing_ids == []
    assert hydrated.canonical_bytes() == store.canonical_bytes()


def test_export_hydrate_export_fixed_point(tmp_path, registry, compiled):
    posts, truth, store = _sim_store(registry, compiled, seed=62)
    first = export_manifest(store, registry, tmp_path / "m1")
    hydrated, _ = hydrate(load_manifest(tmp_path / "m1"), SimArchive(posts))
    second = export_manifest(hydrated, hydrated.registry, tmp_path / "m2")
    assert second.twitter_post_ids == first.twitter_post_ids
    assert (tmp_path / "m1" / "tweet_ids.txt").read_bytes() == (
        tmp_path / "m2" / "tweet_ids.txt"
    ).read_bytes()


def test_hydration_reports_exactly_the_deleted_ids(tmp_path, registry, compiled):
    posts, truth, store = _sim_store(registry, compiled, seed=63)
    manifest = export_manifest(store, registry, tmp_path / "m")
    rng = random.Random(5)
    victim_ids = set(rng.sample(manifest.twitter_post_ids, len(manifest.twitter_post_ids) // 10))
    deletions = {("twitter", pid): datetime(2017, 10, 5, tzinfo=timezone.utc) for pid in victim_ids}
    archive = SimArchive(posts, deletions)
    _, report = hydrate(load_manifest(tmp_path / "m"), archive)
    assert set(report.missing_ids) == victim_ids
    assert report.fraction == len(victim_ids) / len(manifest.twitter_post_ids)


def test_hydrated_logics_are_recomputed(tmp_path, registry, compiled):
    posts, truth, store = _sim_store(registry, compiled, seed=64, n=500)
    export_manifest(store, registry, tmp_path / "m")
    hydrated, _ = hydrate(load_manifest(tmp_path / "m"), SimArchive(posts))
    assert hydrated.recheck_matches()
    for key, match in hydrated.matches.items():
        assert match.logics == store.matches[key].logics


def test_missing_fraction_by_author_class(tmp_path, registry, compiled):
    """Deletion rates split by actor posts vs user content."""
    posts, truth, store = _sim_store(
        registry,
        compiled,
        seed=65,
        n=6000,
        deletion_rate_user_content=0.18,
        deletion_rate_actor_posts=0.023,
    )
    manifest = export_manifest(store, registry, tmp_path / "m")
    archive = SimArchive.from_truth(posts, truth)
    _, report = hydrate(load_manifest(tmp_path / "m"), archive)
    fractions = missing_by_class(manifest, report, store)
    assert fractions["user_content"] == pytest.approx(0.18, abs=0.04)
    assert fractions["actor_posts"] == pytest.approx(0.023, abs=0.02)
    assert fractions["user_content"] > fractions["actor_posts"]


def test_facebook_reconstruction_is_account_based(tmp_path, registry, compiled):
    fb_posts = [
        make_post("fbp1", "seite eins", platform="facebook", author="CDU", kind="page_post"),
        make_post("fbp2", "seite zwei", platform="facebook", author="SPD", kind="page_post"),
    ]
    tw = make_post("77", "afd dazu")
    store = build_store(registry, fb_posts + [tw], compiled)
    export_manifest(store, registry, tmp_path / "m")
    # the archive also holds an unrelated page's post: must not be hydrated
    stranger = make_post("fbp9", "fremde seite", platform="facebook", author="unrelated.page", kind="page_post")
    hydrated, _ = hydrate(load_manifest(tmp_path / "m"), SimArchive(fb_posts + [tw, stranger]))
    assert ("facebook", "fbp1") in hydrated.posts
    assert ("facebook", "fbp2") in hydrated.posts
    assert ("facebook", "fbp9") not in hydrated.posts
    assert hydrated.canonical_bytes() == store.canonical_bytes()


def test_partial_hydration_resumes(tmp_path, registry, compiled):
    posts, truth, store = _sim_store(registry, compiled, seed=66, n=400)
    manifest = export_manifest(store, registry, tmp_path / "m")

    class FlakyArchive(SimArchive):
        def __init__(self, posts, fail_at):
            super().__init__(posts)
            self.calls = 0
            self.fail_at = fail_at

        def resolve(self, platform, post_id):
            self.calls += 1
            if self.calls == self.fail_at:
                raise ConnectionError("archive down")
            return super().resolve(platform, post_id)

    archive = FlakyArchive(posts, fail_at=50)
    partial, report = hydrate(load_manifest(tmp_path / "m"), archive)
    assert report.resume_cursor == 49
    resumed, report2 = hydrate(load_manifest(tmp_path / "m"), SimArchive(posts), resume_from=report.resume_cursor)
    assert report2.resume_cursor is None
    merged_keys = set(partial.posts) | set(resumed.posts)
    assert merged_keys == set(store.posts)


def test_non_decimal_twitter_id_rejected(tmp_path, registry, compiled):
    store = build_store(registry, [make_post("abc", "afd")], compiled)
    with pytest.raises(ManifestError, match="decimal"):
        export_manifest(store, registry, tmp_path / "m")
