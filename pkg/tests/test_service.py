from __future__ import annotations

import csv
import io
import json
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor

import pytest

from polcomm.selectors import analysis_matches, compile_selectors
from polcomm.model import Selector
from polcomm.service import (
    QueryError,
    TimeSeriesQuery,
    meta_response,
    query_timeseries,
    serve_background,
    timeseries_csv_body,
    timeseries_response,
)
from polcomm.simulator import SimParams, generate

from .conftest import build_store, make_post


@pytest.fixture(scope="module")
def store(registry, compiled):
    posts, _ = generate(
        registry,
        SimParams(n_posts=3000, relevant_fraction=0.5, twitter_share=0.6),
        seed=71,
    )
    posts = posts + [
        make_post("990000", "jamaika oder grosse koalition?", author="MartinSchulz"),
        make_post("990001", "jamaika ohne uns", author="c_lindner"),
    ]
    return build_store(registry, sorted(posts, key=lambda p: p.created_at), compiled)


@pytest.fixture(scope="module")
def base_url(store):
    server, url = serve_background(store)
    yield url
    server.shutdown()
    server.server_close()


def _get(url: str):
    with urllib.request.urlopen(url) as resp:
        return resp.status, resp.read()


def test_query_returns_one_series_per_term(store):
    query = TimeSeriesQuery(terms=["jamaika", "grosse koalition"])
    series = query_timeseries(query, store)
    assert set(series) == {"jamaika", "grosse koalition"}
    start, end = store.registry.collection_period
    expected_days = (end.date() - start.date()).days + 1
    for ts in series.values():
        assert len(ts.points) == expected_days


def test_zero_match_term_gives_zero_series(store):
    query = TimeSeriesQuery(terms=["quantencomputer"], scope="all")
    [series] = query_timeseries(query, store).values()
    assert series.total() == 0


def test_query_equals_recount_oracle(store):
    """Oracle: independent per-post rescan with a fresh compiled selector."""
    query = TimeSeriesQuery(terms=["merkel", "afd"], scope="all")
    result = query_timeseries(query, store)
    for term in query.terms:
        compiled_term = compile_selectors([Selector.make(term, "politics")])
        expected: dict = {}
        for post in store.posts.values():
            if analysis_matches(post, compiled_term):
                day = post.created_at.date()
                expected[day] = expected.get(day, 0) + 1
        for point in result[term].points:
            assert point.absolute == expected.get(point.day, 0)


def test_partisan_scope_restricts_to_party_accounts(store):
    registry = store.registry
    all_scope = query_timeseries(TimeSeriesQuery(terms=["jamaika"], scope="all"), store)
    partisan = query_timeseries(TimeSeriesQuery(terms=["jamaika"], scope="partisan"), store)
    assert partisan["jamaika"].total() <= all_scope["jamaika"].total()
    expected = 0
    for post in store.posts.values():
        account = registry.account_for(post.platform, post.author_handle, post.author_id)
        if account is None or registry.party_of_account(account) is None:
            continue
        if analysis_matches(post, compile_selectors([Selector.make("jamaika", "politics")])):
            expected += 1
    assert partisan["jamaika"].total() == expected


def test_party_filter_changes_counts(store):
    spd = query_timeseries(TimeSeriesQuery(terms=["jamaika"], party="SPD"), store)
    fdp = query_timeseries(TimeSeriesQuery(terms=["jamaika"], party="FDP"), store)
    assert spd["jamaika"].total() >= 1
    assert fdp["jamaika"].total() >= 1
    both = query_timeseries(TimeSeriesQuery(terms=["jamaika"]), store)
    assert both["jamaika"].total() >= spd["jamaika"].total() + fdp["jamaika"].total() - 1


def test_unknown_party_raises_query_error():
    with pytest.raises(QueryError):
        TimeSeriesQuery(terms=["merkel"], party="XYZ")


def test_empty_terms_raise():
    with pytest.raises(QueryError):
        TimeSeriesQuery(terms=[])
    with pytest.raises(QueryError):
        TimeSeriesQuery(terms=["  "])


def test_meta_response_shape(store):
    meta = meta_response(store)
    assert meta["parties"] == sorted(["AfD", "Grüne", "CDU", "CSU", "FDP", "Linke", "SPD"])
    assert meta["scopes"] == ["partisan", "all"]


def test_json_and_csv_numbers_identical(store):
    query = TimeSeriesQuery(terms=["merkel", "jamaika"], scope="all")
    payload = timeseries_response(query, store)
    body = timeseries_csv_body(query, store)
    rows = list(csv.reader(io.StringIO(body)))
    assert rows[0] == ["term", "date", "absolute", "relative"]
    flat_json = {
        (series["term"], point["date"]): (point["absolute"], point["relative"])
        for series in payload["series"]
        for point in series["points"]
    }
    assert len(rows) - 1 == len(flat_json)
    for term, day, absolute, relative in rows[1:]:
        expected = flat_json[(term, day)]
        assert int(absolute) == expected[0]
        assert float(relative) == expected[1]


# --- HTTP endpoints -----------------------------------------------------------


def test_http_timeseries_ok(base_url):
    status, body = _get(base_url + "/api/v1/timeseries?terms=merkel")
    assert status == 200
    payload = json.loads(body)
    assert payload["series"][0]["term"] == "merkel"
    assert payload["query"]["scope"] == "partisan"


def test_http_unknown_party_is_400(base_url):
    with pytest.raises(urllib.error.HTTPError) as err:
        _get(base_url + "/api/v1/timeseries?terms=merkel&party=XYZ")
    assert err.value.code == 400
    assert "party" in json.loads(err.value.read())["error"]


def test_http_missing_terms_is_400(base_url):
    with pytest.raises(urllib.error.HTTPError) as err:
        _get(base_url + "/api/v1/timeseries")
    assert err.value.code == 400


def test_http_unknown_path_is_404(base_url):
    with pytest.raises(urllib.error.HTTPError) as err:
        _get(base_url + "/api/v1/nope")
    assert err.value.code == 404


def test_http_meta(base_url):
    status, body = _get(base_url + "/api/v1/meta")
    assert status == 200
    assert "parties" in json.loads(body)


def test_http_csv_matches_json(base_url):
    url = "/api/v1/timeseries?terms=jamaika,grosse%20koalition&scope=all"
    _, json_body = _get(base_url + url)
    _, csv_body = _get(base_url + "/api/v1/timeseries.csv?terms=jamaika,grosse%20koalition&scope=all")
    payload = json.loads(json_body)
    rows = list(csv.reader(io.StringIO(csv_body.decode("utf-8"))))[1:]
    flat = [
        (series["term"], point["date"], point["absolute"], point["relative"])
        for series in payload["series"]
        for point in series["points"]
    ]
    assert [(t, d, int(a), float(r)) for t, d, a, r in rows] == flat


def test_concurrent_identical_requests_byte_identical(base_url):
    url = base_url + "/api/v1/timeseries?terms=merkel,afd&normalize=relative"
    with ThreadPoolExecutor(max_workers=24) as pool:
        bodies = list(pool.map(lambda _: _get(url)[1], range(100)))
    assert len(set(bodies)) == 1


def test_static_files_served(registry, compiled, tmp_path):
    (tmp_path / "index.html").write_text("<h1>monitor</h1>", encoding="utf-8")
    store = build_store(registry, [], compiled)
    server, url = serve_background(store, static_dir=tmp_path)
    try:
        status, body = _get(url + "/")
        assert status == 200
        assert b"monitor" in body
        with pytest.raises(urllib.error.HTTPError) as err:
            _get(url + "/../etc/passwd")
        assert err.value.code in (400, 404)
    finally:
        server.shutdown()
        server.server_close()
