#!/usr/bin/env python3
# The three access-bias experiments: streaming rate cap vs keyword count,
# engagement lost outside the rolling window, and deletion losses seen by
# anyone rebuilding the dataset later.

import tempfile
from datetime import timedelta
from pathlib import Path

from polcomm import fixture_registry
from polcomm.ingest import ListSource, Store, run_collector
from polcomm.model import Config, Registry, Selector
from polcomm.selectors import compile_selectors
from polcomm.sharing import export_manifest, hydrate, load_manifest, missing_by_class
from polcomm.simulator import CapModel, SimArchive, SimParams, apply_cap, generate
from polcomm.windowing import window_loss


def coverage_vs_catalog_size():
    print("== streaming cap: coverage shrinks as the keyword catalog grows ==")
    catalog = [Selector.make(f"thema{i}", "policy") for i in range(200)]
    registry = Registry([], [], catalog)
    params = SimParams(
        n_posts=100_000,
        duration=timedelta(hours=2),
        relevant_fraction=0.8,
        w_actor_post=0.0, w_retweet=0.0, w_mention=0.0, w_topic=1.0,
    )
    traffic, _ = generate(registry, params, seed=42)
    for size in (10, 50, 200):
        subset = compile_selectors(catalog[:size])
        _, report = apply_cap(traffic, registry, subset, CapModel(cap_fraction=0.01), seed=1)
        print(
            f"  {size:3d} keywords: matched={report.total_matched:6d} "
            f"delivered={report.total_delivered:5d} coverage={report.overall_coverage:.3f}"
        )


def rolling_window_losses():
    print("== rolling window: what an 8-day capture misses ==")
    registry = fixture_registry()
    params = SimParams(
        n_posts=2000, relevant_fraction=0.8, twitter_share=0.0,
        w_actor_post=1.0, w_retweet=0.0, w_mention=0.0, w_topic=0.0,
        engagement_mean=8.0, engagement_late_fraction=0.05,
        engagement_deletion_rate=0.18,
    )
    _, truth = generate(registry, params, seed=11)
    for days in (2, 8, 30):
        report = window_loss(truth, Config(rolling_window=timedelta(days=days)))
        print(
            f"  {days:2d}-day window: missed_late={report.missed_late:.3f} "
            f"missed_deleted={report.missed_deleted:.3f} (of {report.total_events} events)"
        )


def deletion_losses_at_hydration():
    print("== hydration: deletions by author class (user content vs actor posts) ==")
    registry = fixture_registry()
    compiled = compile_selectors(registry.selectors)
    params = SimParams(
        n_posts=20_000, relevant_fraction=0.4,
        deletion_rate_user_content=0.18, deletion_rate_actor_posts=0.023,
    )
    posts, truth = generate(registry, params, seed=13)
    store = Store(registry, compiled)
    run_collector(ListSource(posts), registry, compiled, store)
    with tempfile.TemporaryDirectory() as tmp:
        manifest = export_manifest(store, registry, Path(tmp) / "manifest")
        archive = SimArchive.from_truth(posts, truth)
        _, report = hydrate(load_manifest(Path(tmp) / "manifest"), archive)
        fractions = missing_by_class(manifest, report, store)
    print(f"  shared tweet ids: {len(manifest.twitter_post_ids)}")
    print(f"  overall missing:  {report.fraction:.3f}")
    for cls, fraction in sorted(fractions.items()):
        print(f"  {cls:13s} missing: {fraction:.3f}")


if __name__ == "__main__":
    coverage_vs_catalog_size()
    print()
    rolling_window_losses()
    print()
    deletion_losses_at_hydration()
