"""Command-line pipeline orchestration.

Every stage of the pipeline is reachable here: simulate traffic, run
collectors over archives, backfill keywords, run the engagement window,
compute aggregates as CSV, export/hydrate manifests and serve the
monitoring API.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import timedelta
from pathlib import Path

from . import analytics, langfilter, sharing, simulator
from .ingest import ReplaySource, Store, backfill, run_collector
from .model import (
    DEFAULT_PERIOD,
    Config,
    apply_activity,
    adoption_csv,
    load_config,
    load_registry_dir,
    parse_instant,
    registry_summary,
    validate_registry,
)
from .selectors import Selector
from .service import serve
from .simulator import SimArchive, SimParams
from .windowing import VirtualClock, WindowScheduler


def _load_period(config_path: str | None):
    if config_path:
        raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
        if "collection_period" in raw:
            return (
                parse_instant(raw["collection_period"]["start"]),
                parse_instant(raw["collection_period"]["end"]),
            )
    return DEFAULT_PERIOD


def _load_cfg(config_path: str | None) -> Config:
    return load_config(config_path) if config_path else Config()


def _registry(args):
    return load_registry_dir(args.registry, _load_period(args.config))


def _open_store(path: str, registry) -> Store:
    path = Path(path)
    if path.exists():
        return Store.load(path, registry)
    return Store(registry)


def cmd_simulate(args) -> int:
    registry = _registry(args)
    params = SimParams(
        n_posts=args.posts,
        duration=timedelta(hours=args.duration_hours),
        period_start=_load_period(args.config)[0],
        relevant_fraction=args.relevant_fraction,
        twitter_share=args.twitter_share,
        engagement_mean=args.engagement_mean,
        deletion_rate_user_content=args.deletion_user,
        deletion_rate_actor_posts=args.deletion_actor,
    )
    posts, truth = simulator.generate(registry, params, args.seed)
    simulator.write_traffic(posts, truth, args.out)
    if args.ground_truth:
        simulator.write_ground_truth(truth, args.ground_truth)
    print(json.dumps({"posts": len(posts), "relevant": len(truth.relevant_keys()), "seed": args.seed}))
    return 0


def cmd_collect(args) -> int:
    registry = _registry(args)
    store = _open_store(args.store, registry)
    report = run_collector(ReplaySource(args.archive), registry, store.compiled, store)
    store.save(args.store)
    print(report.to_json_line())
    return 0


def cmd_load(args) -> int:
    registry = _registry(args)
    store = Store(registry)
    for archive in args.archives:
        report = run_collector(ReplaySource(archive), registry, store.compiled, store)
        print(report.to_json_line())
    store.save(args.store)
    return 0


def cmd_backfill(args) -> int:
    registry = _registry(args)
    cfg = _load_cfg(args.config)
    store = _open_store(args.store, registry)
    archive = SimArchive.from_ndjson(args.archive)
    keywords = [Selector.make(k.strip().lower(), "politics") for k in args.keywords.split(",") if k.strip()]
    report = backfill(keywords, archive, cfg.retweet_cap, registry, store.compiled, store)
    store.save(args.store)
    print(report.to_json_line())
    return 0


def cmd_window_run(args) -> int:
    registry = _registry(args)
    cfg = _load_cfg(args.config)
    store = _open_store(args.store, registry)
    truth = simulator.load_ground_truth(args.ground_truth)
    source = simulator.SimEngagementSource(truth)
    clock = VirtualClock(registry.collection_period[0])
    scheduler = WindowScheduler(cfg, clock, source, store)
    for post in store.posts.values():
        scheduler.schedule(post)
    captured = scheduler.run_until(parse_instant(args.until))
    store.save(args.store)
    print(json.dumps({"captured": len(captured), "pending": len(scheduler.queue)}))
    return 0


def cmd_analyze(args) -> int:
    registry = _registry(args)
    cfg = _load_cfg(args.config)
    store = _open_store(args.store, registry)
    if args.aggregate == "daily-series":
        lang = langfilter.filter_detected if args.german_only else None
        series = analytics.daily_series(store, lang_filter=lang)
        out = analytics.timeseries_csv(series)
    elif args.aggregate == "top-selectors":
        ranked = analytics.top_selectors(store, store.compiled, args.k or cfg.top_selectors_k)
        out = analytics.top_selectors_csv(ranked)
    elif args.aggregate == "party-engagement":
        out = analytics.party_engagement_csv(analytics.party_engagement(store, args.platform))
    elif args.aggregate == "top-accounts":
        with_activity = apply_activity(registry, store.posts.values())
        active_store = Store(with_activity)
        active_store.posts = store.posts
        active_store.engagement = store.engagement
        active_store.follower_snapshots = store.follower_snapshots
        by_party = analytics.top_accounts(
            active_store, args.platform or "facebook", args.metric, args.k or cfg.top_accounts_k
        )
        out = analytics.top_accounts_csv(by_party)
    elif args.aggregate == "adoption":
        with_activity = apply_activity(registry, store.posts.values())
        out = adoption_csv(registry_summary(with_activity))
    else:
        raise SystemExit(f"unknown aggregate {args.aggregate!r}")
    sys.stdout.write(out)
    return 0


def cmd_validate(args) -> int:
    registry = _registry(args)
    report = validate_registry(registry)
    for finding in report.findings:
        print(json.dumps({"entity": finding.entity_id, "rule": finding.rule, "detail": finding.detail}))
    print(json.dumps({"findings": len(report.findings), "ok": report.ok}))
    return 0 if report.ok else 1


def cmd_export_manifest(args) -> int:
    registry = _registry(args)
    store = _open_store(args.store, registry)
    manifest = sharing.export_manifest(store, registry, args.out)
    print(json.dumps({"tweet_ids": len(manifest.twitter_post_ids), "directory": str(manifest.directory)}))
    return 0


def cmd_hydrate(args) -> int:
    manifest = sharing.load_manifest(args.manifest)
    archive = SimArchive.from_ndjson(args.archive)
    store, report = sharing.hydrate(manifest, archive)
    store.save(args.store)
    print(report.to_json_line())
    return 0


def cmd_serve(args) -> int:
    registry = _registry(args)
    store = Store.load(args.store, registry)
    server = serve(store, args.host, args.port, args.static)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polcomm", description=__doc__)
    parser.add_argument("--config", help="JSON config file with collection parameters")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized stages")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate synthetic traffic plus ground truth")
    p.add_argument("--registry", required=True)
    p.add_argument("--posts", type=int, default=10000)
    p.add_argument("--duration-hours", type=float, default=168.0)
    p.add_argument("--relevant-fraction", type=float, default=0.1)
    p.add_argument("--twitter-share", type=float, default=0.8)
    p.add_argument("--engagement-mean", type=float, default=0.0)
    p.add_argument("--deletion-user", type=float, default=0.0)
    p.add_argument("--deletion-actor", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.add_argument("--ground-truth")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("collect", help="run one collector over an archive into a store")
    p.add_argument("--registry", required=True)
    p.add_argument("--archive", required=True)
    p.add_argument("--store", required=True)
    p.set_defaults(func=cmd_collect)

    p = sub.add_parser("load", help="build a fresh store from one or more archives")
    p.add_argument("--registry", required=True)
    p.add_argument("--archives", nargs="+", required=True)
    p.add_argument("--store", required=True)
    p.set_defaults(func=cmd_load)

    p = sub.add_parser("backfill", help="ex-post keyword scrape with a retweet cap")
    p.add_argument("--registry", required=True)
    p.add_argument("--archive", required=True)
    p.add_argument("--keywords", required=True, help="comma-separated keywords")
    p.add_argument("--store", required=True)
    p.set_defaults(func=cmd_backfill)

    p = sub.add_parser("window", help="rolling-window engagement operations")
    wsub = p.add_subparsers(dest="window_command", required=True)
    w = wsub.add_parser("run", help="schedule stored posts and capture due engagement")
    w.add_argument("--registry", required=True)
    w.add_argument("--store", required=True)
    w.add_argument("--ground-truth", required=True)
    w.add_argument("--until", required=True, help="virtual instant to run to (ISO-8601)")
    w.set_defaults(func=cmd_window_run)

    p = sub.add_parser("analyze", help="compute an aggregate as CSV on stdout")
    p.add_argument(
        "aggregate",
        choices=["daily-series", "top-selectors", "party-engagement", "top-accounts", "adoption"],
    )
    p.add_argument("--registry", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--platform", choices=["facebook", "twitter"])
    p.add_argument("--metric", choices=["page_likes", "followers"], default="page_likes")
    p.add_argument("--k", type=int)
    p.add_argument("--german-only", action="store_true", help="apply the detected-language filter")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("validate", help="validate a registry; findings as JSON lines")
    p.add_argument("--registry", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("export-manifest", help="write the reconstruction package")
    p.add_argument("--registry", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_manifest)

    p = sub.add_parser("hydrate", help="rebuild a store from a manifest and archive")
    p.add_argument("--manifest", required=True)
    p.add_argument("--archive", required=True)
    p.add_argument("--store", required=True)
    p.set_defaults(func=cmd_hydrate)

    p = sub.add_parser("serve", help="run the monitoring HTTP API")
    p.add_argument("--registry", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8040)
    p.add_argument("--static", help="directory of frontend assets to serve at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
