"""German-language filtering strategies and their evaluation harness.

Two filters are compared: keeping posts whose author runs a German
interface, and keeping posts the platform's language detector labeled
German. Neither is built here; both fields arrive with the data, and the
harness only measures how each strategy disagrees with human coding.

Note on rates: the published per-cell percentages for this kind of
evaluation are ambiguous about their denominator, so this module reports
raw counts plus rates over the evaluated sample and leaves any other
normalization to the caller.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .ingest import Post, Store

GERMAN = "de"
HUMAN_LABELS = ("german", "non_german")


def filter_interface(posts: Iterable[Post]) -> list[Post]:
    """Posts whose author chose a German interface; unknown is excluded."""
    return [p for p in posts if p.interface_lang == GERMAN]


def filter_detected(posts: Iterable[Post]) -> list[Post]:
    """Posts the platform's classifier labeled German."""
    return [p for p in posts if p.detected_lang == GERMAN]


@dataclass(frozen=True)
class LabeledRef:
    platform: str
    post_id: str
    human_label: str


@dataclass
class LabeledSample:
    refs: list[LabeledRef]

    def __len__(self) -> int:
        return len(self.refs)

    @classmethod
    def from_csv(cls, path: str | Path) -> "LabeledSample":
        refs = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["platform", "post_id", "human_label"]:
                raise ValueError(f"{path}: expected header platform,post_id,human_label")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                platform, post_id, label = (v.strip() for v in row)
                if label not in HUMAN_LABELS:
                    raise ValueError(f"{path}:{lineno}: unknown human label {label!r}")
                refs.append(LabeledRef(platform, post_id, label))
        return cls(refs)


@dataclass(frozen=True)
class ConfusionCounts:
    sample_size: int
    false_positives: int
    false_negatives: int

    @property
    def fp_rate_sample(self) -> float:
        return self.false_positives / self.sample_size if self.sample_size else 0.0

    @property
    def fn_rate_sample(self) -> float:
        return self.false_negatives / self.sample_size if self.sample_size else 0.0


def evaluate(
    filter_fn: Callable[[Sequence[Post]], list[Post]],
    sample: LabeledSample,
    store: Store,
) -> ConfusionCounts:
    """Confusion counts of a filter against human labels.

    A false positive is a retained post humans coded non-German; a false
    negative is an excluded post humans coded German.
    """
    posts = []
    for ref in sample.refs:
        post = store.posts.get((ref.platform, ref.post_id))
        if post is None:
            raise KeyError(f"labeled post {ref.platform}/{ref.post_id} is not in the store")
        posts.append(post)
    retained = {p.key for p in filter_fn(posts)}
    fp = fn = 0
    for ref, post in zip(sample.refs, posts):
        if post.key in retained:
            fp += ref.human_label == "non_german"
        else:
            fn += ref.human_label == "german"
    return ConfusionCounts(len(sample.refs), fp, fn)
