#!/usr/bin/env python3
# Build the communication-space registry from master lists, validate it,
# and print the per-party social media adoption table.

from polcomm import data_path, fixture_registry, registry_summary, validate_registry
from polcomm.model import adoption_csv, apply_activity, load_selectors
from polcomm.simulator import SimParams, generate


def main():
    registry = fixture_registry()
    print(f"candidates: {len(registry.candidates)}")
    print(f"accounts:   {len(registry.accounts)}")
    print(f"selectors:  {len(registry.selectors)}")

    report = validate_registry(registry)
    print(f"validation findings: {len(report.findings)}")
    for finding in report.findings:
        print(f"  {finding.entity_id}: {finding.rule} {finding.detail}")

    # the full published keyword lists ship with the package too
    full = []
    for category in ("polity", "policy", "politics", "parties"):
        full.extend(load_selectors(data_path(f"selectors_{category}.txt")))
    print(f"full published selector catalog: {len(full)} entries")

    # activity flags ("public & active") are derived from collected posts
    posts, _ = generate(registry, SimParams(n_posts=5000, relevant_fraction=0.5), seed=1)
    with_activity = apply_activity(registry, posts)
    print()
    print(adoption_csv(registry_summary(with_activity)))


if __name__ == "__main__":
    main()
