#!/usr/bin/env python3
# The exploratory aggregates: daily activity by selection logic, the most
# mentioned selectors, per-party engagement, top accounts and follower churn.

from datetime import datetime, timedelta, timezone

from polcomm import fixture_registry
from polcomm.analytics import (
    daily_series,
    follower_diff,
    party_engagement,
    top_accounts,
    top_selectors,
)
from polcomm.ingest import EngagementSnapshot, FollowerSnapshot, ListSource, Store, run_collector
from polcomm.langfilter import filter_detected
from polcomm.model import apply_activity
from polcomm.selectors import compile_selectors
from polcomm.simulator import SimEngagementSource, SimParams, generate


def main():
    registry = fixture_registry()
    compiled = compile_selectors(registry.selectors)
    params = SimParams(
        n_posts=30_000, relevant_fraction=0.35, twitter_share=0.7,
        engagement_mean=3.0, spikes=((0.55, 0.1),),  # one TV-debate style burst
    )
    posts, truth = generate(registry, params, seed=3)
    store = Store(registry, compiled)
    run_collector(ListSource(posts), registry, compiled, store)
    print(f"store: {len(store)} posts")

    # engagement snapshots at each page post's due instant
    source = SimEngagementSource(truth)
    for key in truth.engagement:
        at = store.posts[key].created_at + timedelta(days=8)
        likes, comments, shares, _ = source.fetch(key, at)
        store.add_engagement(EngagementSnapshot(key[1], key[0], at, likes, comments, shares))

    print("\n== tweets per day by selection logic (unfiltered vs German-only) ==")
    series = daily_series(store)
    filtered = daily_series(store, lang_filter=filter_detected)
    for logic in ("candidate_timeline", "candidate_mention", "topic"):
        print(
            f"  {logic:20s} total={series[logic].total():6d} "
            f"german={filtered[logic].total():6d}"
        )
    busiest = max(series["topic"].points, key=lambda p: p.absolute)
    print(f"  busiest topic day: {busiest.day} ({busiest.absolute} posts, spike injected)")

    print("\n== top 10 mentioned selectors (analysis-mode matching) ==")
    for text, count in top_selectors(store, compiled, 10):
        print(f"  {count:6d}  {text}")

    print("\n== posts and engagement by party ==")
    for row in party_engagement(store):
        print(f"  {row.party:6s} posts={row.posts:5d} likes={row.likes:6d} comments={row.comments:5d} shares={row.shares:5d}")

    print("\n== top twitter accounts by followers ==")
    at = datetime(2017, 6, 27, tzinfo=timezone.utc)
    for account_id, followers in truth.follower_graph.items():
        store.add_follower_snapshot(FollowerSnapshot(account_id, at, followers))
    active_registry = apply_activity(registry, store.posts.values())
    ranked_store = Store(active_registry)
    ranked_store.posts = store.posts
    ranked_store.follower_snapshots = store.follower_snapshots
    for party, entry in top_accounts(ranked_store, "twitter", "followers", 3).items():
        accounts = ", ".join(f"@{handle} ({value})" for handle, value in entry.accounts)
        print(f"  {party:6s} avg={entry.party_average:7.1f}  {accounts}")

    print("\n== follower gains/losses between two snapshot dates ==")
    later = datetime(2017, 9, 14, tzinfo=timezone.utc)
    for account_id in list(truth.follower_graph)[:3]:
        a = FollowerSnapshot(account_id, at, truth.follower_graph[account_id])
        b = FollowerSnapshot(account_id, later, truth.follower_graph_later[account_id])
        gained, lost = follower_diff(a, b)
        print(f"  {account_id:18s} +{len(gained)} / -{len(lost)}")


if __name__ == "__main__":
    main()
