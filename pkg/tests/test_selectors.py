from __future__ import annotations

import logging

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polcomm.model import Selector
from polcomm.selectors import (
    LOGICS,
    UnknownPlatformError,
    analysis_matches,
    classify,
    compile_selectors,
    match_text,
    tokenize,
)

from .conftest import make_post
from .corpus import CORPUS, CORPUS_SELECTOR_TEXTS


def sels(*texts: str) -> list[Selector]:
    return [Selector.make(t, "politics") for t in texts]


CORPUS_COMPILED = compile_selectors(sels(*CORPUS_SELECTOR_TEXTS))


# --- naive per-selector oracle (no indexes, one linear scan per selector) ---


def _strip(token: str) -> str:
    return token[1:] if token[0] in "#@" else token


def naive_collection(text: str, sel: Selector) -> bool:
    tokens = tokenize(text)
    if sel.mode == "hashtag":
        return sel.text in tokens
    if sel.mode == "token":
        return any(t == sel.text or (t.startswith("#") and t[1:] == sel.text) for t in tokens)
    parts = tokenize(sel.text)
    for i in range(len(tokens) - len(parts) + 1):
        if all(
            not tokens[i + j].startswith("@")
            and (tokens[i + j][1:] if tokens[i + j].startswith("#") else tokens[i + j]) == parts[j]
            for j in range(len(parts))
        ):
            return True
    return False


def naive_analysis(text: str, sel: Selector) -> bool:
    if naive_collection(text, sel):
        return True
    stripped = sel.text.lstrip("#")
    if " " in stripped:
        return stripped in text.lower()
    return any(stripped in _strip(t) for t in tokenize(text) if t)


def naive_match(text: str, selectors: list[Selector], mode: str) -> set[str]:
    check = naive_collection if mode == "collection" else naive_analysis
    return {s.text for s in selectors if check(text, s)}


# --- spec examples -----------------------------------------------------------


def test_compile_token():
    cs = compile_selectors(sels("afd"))
    assert "afd" in cs.token_index


def test_compile_hashtag_not_in_token_index():
    cs = compile_selectors(sels("#fdp"))
    assert "fdp" in cs.hashtag_index
    assert "fdp" not in cs.token_index


def test_compile_phrase_two_tokens():
    cs = compile_selectors(sels("sigmar gabriel"))
    [(parts, text)] = cs.phrase_index["sigmar"]
    assert parts == ("sigmar", "gabriel")
    assert text == "sigmar gabriel"


def test_compile_duplicate_warns_once(caplog):
    with caplog.at_level(logging.WARNING):
        cs = compile_selectors(sels("afd", "afd"))
    assert len(cs.token_index) == 1
    assert any("duplicate selector" in rec.message for rec in caplog.records)


@pytest.mark.parametrize(
    "text,selector_texts,mode,expected",
    [
        ("Die #FDP gewinnt", ["#fdp"], "collection", {"#fdp"}),
        ("quel fdp celui-là", ["#fdp"], "collection", set()),
        ("#noafd jetzt @AfDBerlin", ["afd"], "analysis", {"afd"}),
        ("Gabriel García Márquez", ["sigmar gabriel"], "collection", set()),
        ("", ["afd", "#fdp", "sigmar gabriel"], "collection", set()),
        ("", ["afd", "#fdp", "sigmar gabriel"], "analysis", set()),
    ],
)
def test_match_text_examples(text, selector_texts, mode, expected):
    assert match_text(text, compile_selectors(sels(*selector_texts)), mode) == expected


def test_corpus_hand_labels_all_match():
    hits = 0
    for text, expect_collection, expect_analysis in CORPUS:
        got_c = match_text(text, CORPUS_COMPILED, "collection")
        got_a = match_text(text, CORPUS_COMPILED, "analysis")
        assert got_c == expect_collection, f"collection mismatch on {text!r}"
        assert got_a == expect_analysis, f"analysis mismatch on {text!r}"
        hits += 1
    assert hits == 50


def test_corpus_agrees_with_naive_oracle():
    selectors = sels(*CORPUS_SELECTOR_TEXTS)
    for text, _, _ in CORPUS:
        assert match_text(text, CORPUS_COMPILED, "collection") == naive_match(text, selectors, "collection")
        assert match_text(text, CORPUS_COMPILED, "analysis") == naive_match(text, selectors, "analysis")


# --- classify ----------------------------------------------------------------


def test_classify_schulz_tvduell_tweet(registry, compiled):
    post = make_post("1", "@MartinSchulz has won the #tvduell", mentions=["MartinSchulz"])
    result = classify(post, registry, compiled)
    assert result.logics == frozenset({"candidate_mention", "topic"})
    assert result.matched_selectors == frozenset({"tvduell"})


def test_classify_candidate_timeline_only(registry, compiled):
    post = make_post("2", "Guten Morgen aus Aachen", author="MartinSchulz")
    result = classify(post, registry, compiled)
    assert result.logics == frozenset({"candidate_timeline"})
    assert result.matched_selectors == frozenset()


def test_classify_org_retweet_with_topic(registry, compiled):
    post = make_post(
        "3",
        "rt @tagesschau: alles zur btw17",
        kind="retweet",
        referenced=("900", "tagesschau"),
    )
    result = classify(post, registry, compiled)
    assert result.logics == frozenset({"org_retweet", "topic"})
    assert result.matched_selectors == frozenset({"btw17"})


def test_classify_handles_case_insensitive(registry, compiled):
    post = make_post("4", "hallo", author="MARTINSCHULZ")
    assert classify(post, registry, compiled).logics == frozenset({"candidate_timeline"})


def test_classify_by_numeric_author_id(registry, compiled):
    post = make_post("5", "hallo", author="renamed_user")
    post.author_id = 17675072  # MartinSchulz's numeric id
    assert classify(post, registry, compiled).logics == frozenset({"candidate_timeline"})


def test_classify_unknown_platform_raises(registry, compiled):
    post = make_post("6", "hallo", platform="myspace")
    with pytest.raises(UnknownPlatformError):
        classify(post, registry, compiled)


def test_classify_is_pure(registry, compiled):
    post = make_post("7", "Die AfD und @MartinSchulz", mentions=["MartinSchulz"])
    assert classify(post, registry, compiled) == classify(post, registry, compiled)


def test_classify_out_of_space_post(registry, compiled):
    post = make_post("8", "nur wetter heute")
    result = classify(post, registry, compiled)
    assert result.logics == frozenset()
    assert not result.in_space
    assert set(LOGICS) >= set(result.logics)


def test_classify_agrees_with_naive_scan_on_crafted_corpus(registry, compiled):
    """Oracle: linear scans over the account lists, no lookup maps."""
    posts = []
    for i, (text, _, _) in enumerate(CORPUS):
        posts.append(make_post(f"c{i}", text))
    posts.append(make_post("m1", "an alle", mentions=["AfDBerlin"]))
    posts.append(make_post("m2", "weiter so", mentions=["MartinSchulz", "spdde"]))
    posts.append(make_post("r1", "rt", kind="retweet", referenced=("900", "MartinSchulz")))
    posts.append(make_post("r2", "rt", kind="reply", referenced=("901", "tagesschau")))
    posts.append(make_post("a1", "moin", author="c_lindner"))
    posts.append(make_post("a2", "moin", author="jusos"))

    def naive_account(platform, handle):
        import unicodedata

        if handle is None:
            return None
        key = unicodedata.normalize("NFC", handle).lower()
        for acc in registry.accounts:
            if acc.platform == platform and unicodedata.normalize("NFC", acc.handle).lower() == key:
                return acc
        return None

    for post in posts:
        expected = set()
        author = naive_account(post.platform, post.author_handle)
        if author is not None:
            expected.add("candidate_timeline" if author.role == "candidate" else "org_timeline")
        if post.kind in ("retweet", "reply"):
            ref = naive_account(post.platform, post.referenced_author_handle)
            if ref is not None:
                expected.add("candidate_retweet" if ref.role == "candidate" else "org_retweet")
        for handle in post.mentioned_handles:
            acc = naive_account(post.platform, handle)
            if acc is not None:
                expected.add("candidate_mention" if acc.role == "candidate" else "org_mention")
        if naive_match(post.text, list(registry.selectors), "collection"):
            expected.add("topic")
        assert classify(post, registry, compiled).logics == frozenset(expected), post.text


def test_analysis_matches_includes_mention_handles(compiled):
    post = make_post("9", "schaut mal", mentions=["AfDBerlin"])
    assert "afd" in analysis_matches(post, compiled)


# --- properties --------------------------------------------------------------

_POOL = [
    "afd", "cdu", "spd", "merkel", "schulz", "btw17", "#fdp", "#btw17",
    "groko", "sigmar gabriel", "grosse koalition", "özdemir", "tvduell",
]
_WORDS = [
    "die", "der", "afd", "cdu", "spd", "merkel", "schulz", "btw17", "fdp",
    "#fdp", "#noafd", "#btw17", "@afdberlin", "@martinschulz", "groko",
    "sigmar", "gabriel", "grosse", "koalition", "özdemir", "tvduell",
    "wetter", "heute", "quel", "celui-là",
]

texts = st.lists(st.sampled_from(_WORDS), min_size=0, max_size=12).map(" ".join)
subsets = st.lists(st.sampled_from(_POOL), min_size=0, max_size=len(_POOL), unique=True)


@settings(max_examples=200, deadline=None)
@given(texts, subsets, subsets, st.sampled_from(["collection", "analysis"]))
def test_monotonicity_in_selector_sets(text, s1, extra, mode):
    small = sels(*s1)
    big = sels(*sorted(set(s1) | set(extra)))
    got_small = match_text(text, compile_selectors(small), mode)
    got_big = match_text(text, compile_selectors(big), mode)
    assert got_small <= got_big


@settings(max_examples=200, deadline=None)
@given(texts, subsets)
def test_collection_contained_in_analysis(text, texts_subset):
    cs = compile_selectors(sels(*texts_subset))
    assert match_text(text, cs, "collection") <= match_text(text, cs, "analysis")


@settings(max_examples=150, deadline=None)
@given(texts, subsets, subsets)
def test_compile_union_matches_union_of_compiles(text, s1, s2):
    joint = compile_selectors(sels(*s1) + sels(*s2))
    part1 = compile_selectors(sels(*s1))
    part2 = compile_selectors(sels(*s2))
    for mode in ("collection", "analysis"):
        assert match_text(text, joint, mode) == match_text(text, part1, mode) | match_text(
            text, part2, mode
        )


@settings(max_examples=300, deadline=None)
@given(texts, subsets, st.sampled_from(["collection", "analysis"]))
def test_match_equals_naive_oracle(text, subset, mode):
    selectors = sels(*subset)
    assert match_text(text, compile_selectors(selectors), mode) == naive_match(text, selectors, mode)
