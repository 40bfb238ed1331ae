#!/usr/bin/env python3
# Data sharing and monitoring: export the reconstruction manifest, hydrate a
# fresh store from it, then serve the monitoring API and run the example
# coalition-debate query against it.

import json
import tempfile
import urllib.request
from pathlib import Path

from polcomm import fixture_registry
from polcomm.ingest import ListSource, Store, run_collector
from polcomm.selectors import compile_selectors
from polcomm.service import serve_background
from polcomm.sharing import export_manifest, hydrate, load_manifest
from polcomm.simulator import SimArchive, SimParams, generate


def main():
    registry = fixture_registry()
    compiled = compile_selectors(registry.selectors)
    posts, _ = generate(registry, SimParams(n_posts=10_000, relevant_fraction=0.5), seed=9)
    store = Store(registry, compiled)
    run_collector(ListSource(posts), registry, compiled, store)

    with tempfile.TemporaryDirectory() as tmp:
        manifest_dir = Path(tmp) / "btw17-manifest"
        manifest = export_manifest(store, registry, manifest_dir)
        print(f"manifest: {len(manifest.twitter_post_ids)} tweet ids in {manifest_dir.name}/")
        print(f"  files: {sorted(p.name for p in manifest_dir.iterdir())}")

        hydrated, report = hydrate(load_manifest(manifest_dir), SimArchive(posts))
        print(f"hydrated: {len(hydrated)} posts, missing fraction {report.fraction:.3f}")
        print(f"byte-identical to the original store: {hydrated.canonical_bytes() == store.canonical_bytes()}")

    server, url = serve_background(store)
    print(f"\nmonitoring api on {url}")
    query = "/api/v1/timeseries?terms=jamaika,grosse%20koalition&scope=all&normalize=relative"
    with urllib.request.urlopen(url + query) as resp:
        payload = json.loads(resp.read())
    for series in payload["series"]:
        total = sum(p["absolute"] for p in series["points"])
        peak = max(series["points"], key=lambda p: p["absolute"])
        print(f"  term {series['term']!r}: {total} posts, peak {peak['date']} ({peak['absolute']})")
    with urllib.request.urlopen(url + "/api/v1/timeseries.csv?terms=jamaika") as resp:
        lines = resp.read().decode("utf-8").splitlines()
    print(f"  csv download: {len(lines) - 1} rows, header {lines[0]!r}")
    server.shutdown()
    server.server_close()


if __name__ == "__main__":
    main()
