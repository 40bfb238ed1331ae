from __future__ import annotations

from datetime import datetime, timezone

import pytest

from polcomm import fixture_registry
from polcomm.ingest import ListSource, Post, Store, run_collector
from polcomm.selectors import compile_selectors


@pytest.fixture(scope="session")
def registry():
    return fixture_registry()


@pytest.fixture(scope="session")
def compiled(registry):
    return compile_selectors(registry.selectors)


def make_post(
    post_id: str,
    text: str = "",
    author: str = "someuser",
    platform: str = "twitter",
    created: str = "2017-08-15T12:00:00Z",
    kind: str = "original",
    mentions: list[str] | None = None,
    referenced: tuple[str, str] | None = None,
    detected_lang: str = "de",
    interface_lang: str | None = "de",
) -> Post:
    created_at = datetime.fromisoformat(created.replace("Z", "+00:00")).astimezone(timezone.utc)
    ref_id, ref_author = referenced if referenced else (None, None)
    return Post(
        post_id=post_id,
        platform=platform,
        author_handle=author,
        created_at=created_at,
        text=text,
        kind=kind,
        referenced_post_id=ref_id,
        referenced_author_handle=ref_author,
        mentioned_handles=mentions or [],
        hashtags=[t[1:].lower() for t in text.split() if t.startswith("#")],
        detected_lang=detected_lang,
        interface_lang=interface_lang,
    )


def build_store(registry, posts, compiled=None) -> Store:
    cs = compiled if compiled is not None else compile_selectors(registry.selectors)
    store = Store(registry, cs)
    run_collector(ListSource(posts), registry, cs, store)
    return store
