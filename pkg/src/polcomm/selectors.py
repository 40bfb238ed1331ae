"""Keyword matching and selection-logic classification.

Token matching semantics (the platform's original "track" behaviour is
undocumented, so these are ours and are normative for the pipeline):

* text is lowercased and split into tokens; ``#`` and ``@`` bind to the
  token that follows them, internal hyphens are kept ("göring-eckardt"
  is one token); umlaut spellings are never transliterated.
* collection mode: a token selector matches a bare token or a hashtag
  with the same word ("btw17" matches both "btw17" and "#btw17"); a
  hashtag selector matches hashtag tokens only; a phrase selector
  matches a run of consecutive tokens. Mention tokens ("@x") never
  match token or phrase selectors at collection time.
* analysis mode additionally matches the '#'-stripped selector text as
  a substring of any sigil-stripped token, including hashtags and
  @-mentions ("afd" matches "#noafd" and "@AfDBerlin"), and a phrase as
  a substring of the whole text.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

from .model import Registry, Selector

if TYPE_CHECKING:  # pragma: no cover
    from .ingest import Post

log = logging.getLogger(__name__)

LOGICS = (
    "candidate_timeline",
    "candidate_retweet",
    "candidate_mention",
    "org_timeline",
    "org_retweet",
    "org_mention",
    "topic",
)

_TOKEN_RE = re.compile(r"[#@]?\w+(?:-\w+)*")


def tokenize(text: str) -> list[str]:
    """Lowercased tokens with their leading '#'/'@' sigil preserved."""
    return _TOKEN_RE.findall(text.lower())


def _strip_sigil(token: str) -> str:
    return token[1:] if token[0] in "#@" else token


class UnknownPlatformError(ValueError):
    pass


@dataclass
class CompiledSelectors:
    """Immutable multi-pattern matcher compiled from a selector list."""

    source: list[Selector]
    token_index: dict[str, str] = field(default_factory=dict, repr=False)
    hashtag_index: dict[str, str] = field(default_factory=dict, repr=False)
    phrase_index: dict[str, list[tuple[tuple[str, ...], str]]] = field(default_factory=dict, repr=False)
    substring_index: list[tuple[str, str]] = field(default_factory=list, repr=False)
    _sub_cache: dict[str, frozenset[str]] = field(default_factory=dict, repr=False, compare=False)

    def version_texts(self) -> list[str]:
        return sorted(s.text for s in self.source)


def compile_selectors(selectors: Sequence[Selector]) -> CompiledSelectors:
    """Build the token/hashtag/phrase indexes; duplicate texts collapse."""
    cs = CompiledSelectors(source=list(selectors))
    seen: set[str] = set()
    for sel in selectors:
        if sel.text in seen:
            log.warning("duplicate selector %r collapsed to a single entry", sel.text)
            continue
        seen.add(sel.text)
        if sel.mode == "hashtag":
            cs.hashtag_index[sel.text[1:]] = sel.text
        elif sel.mode == "phrase":
            parts = tuple(tokenize(sel.text))
            cs.phrase_index.setdefault(parts[0], []).append((parts, sel.text))
        else:
            cs.token_index[sel.text] = sel.text
        cs.substring_index.append((sel.text.lstrip("#"), sel.text))
    return cs


def _collection_matches(tokens: list[str], cs: CompiledSelectors) -> set[str]:
    matched: set[str] = set()
    token_index = cs.token_index
    hashtag_index = cs.hashtag_index
    phrase_index = cs.phrase_index
    n = len(tokens)
    for i, tok in enumerate(tokens):
        first = tok[0]
        if first == "@":
            continue
        if first == "#":
            bare = tok[1:]
            hit = hashtag_index.get(bare)
            if hit is not None:
                matched.add(hit)
        else:
            bare = tok
        hit = token_index.get(bare)
        if hit is not None:
            matched.add(hit)
        if bare in phrase_index:
            for parts, text in phrase_index[bare]:
                end = i + len(parts)
                if end > n:
                    continue
                ok = True
                for j in range(1, len(parts)):
                    nxt = tokens[i + j]
                    if nxt[0] == "@" or (nxt[1:] if nxt[0] == "#" else nxt) != parts[j]:
                        ok = False
                        break
                if ok:
                    matched.add(text)
    return matched


def _substring_matches_token(bare: str, cs: CompiledSelectors) -> frozenset[str]:
    cached = cs._sub_cache.get(bare)
    if cached is None:
        cached = frozenset(text for stripped, text in cs.substring_index if stripped in bare)
        cs._sub_cache[bare] = cached
    return cached


def match_text(text: str, cs: CompiledSelectors, mode: str = "collection") -> set[str]:
    """Selector texts matching ``text`` under collection or analysis rules."""
    if mode not in ("collection", "analysis"):
        raise ValueError(f"unknown match mode {mode!r}")
    tokens = tokenize(text)
    matched = _collection_matches(tokens, cs)
    if mode == "analysis":
        for tok in tokens:
            matched |= _substring_matches_token(_strip_sigil(tok), cs)
        lowered = text.lower()
        for stripped, sel_text in cs.substring_index:
            if " " in stripped and stripped in lowered:
                matched.add(sel_text)
    return matched


@dataclass(frozen=True)
class MatchResult:
    """Why a post belongs to the communication space (its dedup provenance)."""

    post_id: str
    platform: str
    logics: frozenset[str]
    matched_selectors: frozenset[str]

    @property
    def in_space(self) -> bool:
        return bool(self.logics)


def classify(post: "Post", registry: Registry, cs: CompiledSelectors) -> MatchResult:
    """Assign every applicable selection logic to a post.

    Pure: identical inputs produce an identical MatchResult.
    """
    if post.platform not in ("facebook", "twitter"):
        raise UnknownPlatformError(f"unknown platform {post.platform!r}")
    logics: set[str] = set()

    author = registry.account_for(post.platform, post.author_handle, post.author_id)
    if author is not None:
        logics.add("candidate_timeline" if author.role == "candidate" else "org_timeline")

    if post.kind in ("retweet", "reply") and post.referenced_author_handle:
        ref = registry.account_for(post.platform, post.referenced_author_handle)
        if ref is not None:
            logics.add("candidate_retweet" if ref.role == "candidate" else "org_retweet")

    for handle in post.mentioned_handles:
        acc = registry.account_for(post.platform, handle)
        if acc is not None:
            logics.add("candidate_mention" if acc.role == "candidate" else "org_mention")

    matched = match_text(post.text, cs, "collection")
    if matched:
        logics.add("topic")
    return MatchResult(post.post_id, post.platform, frozenset(logics), frozenset(matched))


def analysis_matches(post: "Post", cs: CompiledSelectors) -> set[str]:
    """Analysis-mode matches over a post's text plus its mention handles."""
    matched = match_text(post.text, cs, "analysis")
    for handle in post.mentioned_handles:
        matched |= _substring_matches_token(handle.lower(), cs)
    return matched


def union_matches(a: MatchResult, b: MatchResult) -> MatchResult:
    if (a.platform, a.post_id) != (b.platform, b.post_id):
        raise ValueError("cannot union match results of different posts")
    return MatchResult(a.post_id, a.platform, a.logics | b.logics, a.matched_selectors | b.matched_selectors)
