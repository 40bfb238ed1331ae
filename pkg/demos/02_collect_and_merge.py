#!/usr/bin/env python3
# Run two independent parallel collectors over the same traffic, each with
# its own random outage losses, and show that merging their stores restores
# full recall against the simulator's ground truth.

import random

from polcomm import fixture_registry
from polcomm.ingest import ListSource, Store, merge, run_collector
from polcomm.selectors import compile_selectors
from polcomm.simulator import SimParams, generate


def lossy(posts, drop_fraction, seed):
    rng = random.Random(seed)
    return [p for p in posts if rng.random() > drop_fraction]


def main():
    registry = fixture_registry()
    compiled = compile_selectors(registry.selectors)
    posts, truth = generate(registry, SimParams(n_posts=20_000, relevant_fraction=0.2), seed=7)
    relevant = truth.relevant_keys()
    print(f"traffic: {len(posts)} posts, {len(relevant)} in the communication space")

    stores = []
    for team, seed in (("team-a", 1), ("team-b", 2)):
        store = Store(registry, compiled)
        report = run_collector(
            ListSource(lossy(posts, 0.10, seed), source_id=team), registry, compiled, store
        )
        recall = len(store) / len(relevant)
        print(f"{team}: received={report.received} matched={report.matched} recall={recall:.3f}")
        stores.append(store)

    merged = merge(stores[0], stores[1])
    print(f"merged: {len(merged)} posts, recall={len(merged) / len(relevant):.3f}")
    print(f"merged store logic sets recomputable: {merged.recheck_matches()}")


if __name__ == "__main__":
    main()
