"""Read-only monitoring API over a finalized store.

Researchers query arbitrary terms (matched with analysis-mode selector
semantics, so "merkel" also counts mentions inside hashtags and screen
names), optionally filtered by party, and download the same numbers as
JSON or CSV. Responses depend only on (store snapshot, query), so
identical requests produce byte-identical bodies under any concurrency.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import threading
from collections import Counter
from dataclasses import dataclass
from datetime import timedelta
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .analytics import TimePoint, TimeSeries
from .ingest import Store
from .model import PARTIES, Selector, format_instant
from .selectors import analysis_matches, compile_selectors

log = logging.getLogger(__name__)

SCOPES = ("partisan", "all")
NORMALIZE = ("absolute", "relative")


class QueryError(ValueError):
    pass


@dataclass
class TimeSeriesQuery:
    terms: list[str]
    party: str | None = None
    logics: frozenset[str] | None = None
    normalize: str = "absolute"
    scope: str = "partisan"

    def __post_init__(self) -> None:
        self.terms = [t.strip().lower() for t in self.terms]
        if not self.terms or any(not t for t in self.terms):
            raise QueryError("at least one non-empty term is required")
        if self.party is not None and self.party not in PARTIES:
            raise QueryError(f"unknown party {self.party!r}")
        if self.normalize not in NORMALIZE:
            raise QueryError(f"normalize must be one of {NORMALIZE}")
        if self.scope not in SCOPES:
            raise QueryError(f"scope must be one of {SCOPES}")

    def descriptor(self) -> dict:
        return {
            "terms": self.terms,
            "party": self.party,
            "logics": sorted(self.logics) if self.logics else None,
            "normalize": self.normalize,
            "scope": self.scope,
        }


def query_timeseries(query: TimeSeriesQuery, store: Store) -> dict[str, TimeSeries]:
    """One daily series per term over the store's collection period.

    The relative value divides by all posts of the day that pass the same
    scope/party/logic restriction, independent of the term.
    """
    registry = store.registry
    start, end = registry.collection_period
    first, last = start.date(), end.date()
    days = [first + timedelta(days=i) for i in range((last - first).days + 1)]

    base = []
    for key, post in store.posts.items():
        day = post.created_at.date()
        if not first <= day <= last:
            continue
        if query.scope == "partisan" or query.party is not None:
            account = registry.account_for(post.platform, post.author_handle, post.author_id)
            party = registry.party_of_account(account) if account is not None else None
            if query.scope == "partisan" and party is None:
                continue
            if query.party is not None and party != query.party:
                continue
        if query.logics is not None:
            match = store.matches.get(key)
            if match is None or not (match.logics & query.logics):
                continue
        base.append(post)

    totals: Counter = Counter(p.created_at.date() for p in base)
    out: dict[str, TimeSeries] = {}
    for term in query.terms:
        compiled = compile_selectors([Selector.make(term, "politics")])
        counts: Counter = Counter(
            p.created_at.date() for p in base if analysis_matches(p, compiled)
        )
        points = [
            TimePoint(
                day,
                counts.get(day, 0),
                counts.get(day, 0) / totals[day] if totals.get(day) else 0.0,
            )
            for day in days
        ]
        out[term] = TimeSeries("day", points, {**query.descriptor(), "term": term})
    return out


def timeseries_response(query: TimeSeriesQuery, store: Store) -> dict:
    series = query_timeseries(query, store)
    start, end = store.registry.collection_period
    return {
        "query": query.descriptor(),
        "period": {"start": format_instant(start), "end": format_instant(end)},
        "series": [
            {
                "term": term,
                "points": [
                    {"date": p.day.isoformat(), "absolute": p.absolute, "relative": p.relative}
                    for p in series[term].points
                ],
            }
            for term in query.terms
        ],
    }


def timeseries_csv_body(query: TimeSeriesQuery, store: Store) -> str:
    series = query_timeseries(query, store)
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["term", "date", "absolute", "relative"])
    for term in query.terms:
        for p in series[term].points:
            writer.writerow([term, p.day.isoformat(), p.absolute, p.relative])
    return out.getvalue()


def meta_response(store: Store) -> dict:
    start, end = store.registry.collection_period
    return {
        "parties": sorted(PARTIES),
        "period": {"start": format_instant(start), "end": format_instant(end)},
        "scopes": list(SCOPES),
        "normalize": list(NORMALIZE),
        "posts": len(store),
    }


def _json_bytes(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def parse_query_params(params: dict[str, list[str]]) -> TimeSeriesQuery:
    terms_raw = ",".join(params.get("terms", []))
    terms = [t for t in (s.strip() for s in terms_raw.split(",")) if t]
    if not terms:
        raise QueryError("query parameter 'terms' is required")
    logics_raw = ",".join(params.get("logics", []))
    logics = frozenset(s.strip() for s in logics_raw.split(",") if s.strip()) or None
    return TimeSeriesQuery(
        terms=terms,
        party=params.get("party", [None])[0],
        logics=logics,
        normalize=params.get("normalize", ["absolute"])[0],
        scope=params.get("scope", ["partisan"])[0],
    )


class MonitoringServer(ThreadingHTTPServer):
    daemon_threads = True
    request_queue_size = 128

    def __init__(self, address, store: Store, static_dir: str | Path | None = None):
        super().__init__(address, MonitoringHandler)
        self.store = store
        self.static_dir = Path(static_dir) if static_dir else None


class MonitoringHandler(BaseHTTPRequestHandler):
    server: MonitoringServer
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # keep request noise out of stderr
        log.debug("%s " + fmt, self.address_string(), *args)

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, status: int, message: str) -> None:
        self._send(status, _json_bytes({"error": message}), "application/json; charset=utf-8")

    def do_GET(self) -> None:  # noqa: N802 - http.server API
        parsed = urlparse(self.path)
        params = parse_qs(parsed.query)
        try:
            if parsed.path == "/api/v1/meta":
                self._send(200, _json_bytes(meta_response(self.server.store)), "application/json; charset=utf-8")
            elif parsed.path == "/api/v1/timeseries":
                query = parse_query_params(params)
                body = _json_bytes(timeseries_response(query, self.server.store))
                self._send(200, body, "application/json; charset=utf-8")
            elif parsed.path == "/api/v1/timeseries.csv":
                query = parse_query_params(params)
                body = timeseries_csv_body(query, self.server.store).encode("utf-8")
                self._send(200, body, "text/csv; charset=utf-8")
            else:
                self._serve_static(parsed.path)
        except QueryError as exc:
            self._send_error_json(400, str(exc))
        except BrokenPipeError:  # client went away mid-response
            pass
        except Exception as exc:  # noqa: BLE001
            log.exception("request failed")
            self._send_error_json(500, f"internal error: {exc}")

    def _serve_static(self, path: str) -> None:
        static = self.server.static_dir
        if static is None:
            self._send_error_json(404, f"no such endpoint {path!r}")
            return
        relative = path.lstrip("/") or "index.html"
        target = (static / relative).resolve()
        if not str(target).startswith(str(static.resolve())) or not target.is_file():
            self._send_error_json(404, f"no such file {path!r}")
            return
        content_types = {
            ".html": "text/html; charset=utf-8",
            ".js": "text/javascript; charset=utf-8",
            ".css": "text/css; charset=utf-8",
            ".json": "application/json; charset=utf-8",
            ".svg": "image/svg+xml",
        }
        ctype = content_types.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), ctype)


def serve(store: Store, host: str = "127.0.0.1", port: int = 0, static_dir=None) -> MonitoringServer:
    """Bind the monitoring server; callers run serve_forever (or a thread)."""
    return MonitoringServer((host, port), store, static_dir)


def serve_background(store: Store, host: str = "127.0.0.1", port: int = 0, static_dir=None):
    """Start the server on a daemon thread; returns (server, base_url)."""
    server = serve(store, host, port, static_dir)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    bound_host, bound_port = server.server_address[:2]
    return server, f"http://{bound_host}:{bound_port}"
