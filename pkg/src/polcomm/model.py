"""Master lists, domain types and registry validation.

The registry is the operationalized communication space: election
candidates, their social media accounts, organization accounts (parties,
caucuses, youth organizations, movements, media gatekeepers) and the
keyword selectors that define topic-based collection. A registry is
loaded once from CSV/text master lists, validated, and then shared
read-only by every other stage of the pipeline.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Sequence

PARTIES = ("AfD", "Grüne", "CDU", "CSU", "FDP", "Linke", "SPD")

STATES = (
    "Baden-Württemberg",
    "Bayern",
    "Berlin",
    "Brandenburg",
    "Bremen",
    "Hamburg",
    "Hessen",
    "Mecklenburg-Vorpommern",
    "Niedersachsen",
    "Nordrhein-Westfalen",
    "Rheinland-Pfalz",
    "Saarland",
    "Sachsen",
    "Sachsen-Anhalt",
    "Schleswig-Holstein",
    "Thüringen",
)

CANDIDACIES = ("direct", "list", "both")
PLATFORMS = ("facebook", "twitter")
ROLES = ("candidate", "party_national", "caucus", "state_party", "youth_org", "movement", "media")
VISIBILITIES = ("public", "private")
SELECTOR_CATEGORIES = ("polity", "policy", "politics", "parties")
SELECTOR_MODES = ("token", "hashtag", "phrase")

# Research period of the 2017 Bundestag collection (6 July - 30 September).
DEFAULT_PERIOD = (
    datetime(2017, 7, 6, tzinfo=timezone.utc),
    datetime(2017, 9, 30, 23, 59, 59, tzinfo=timezone.utc),
)


class LoadError(ValueError):
    """Raised when a master-list file cannot be parsed or cross-linked."""

    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)


def parse_instant(text: str) -> datetime:
    """Parse an ISO-8601 instant; naive values are taken as UTC."""
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_instant(dt: datetime) -> str:
    dt = dt.astimezone(timezone.utc)
    if dt.microsecond:
        return dt.strftime("%Y-%m-%dT%H:%M:%S.%f") + "Z"
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def norm_handle(handle: str) -> str:
    """Canonical handle key: NFC-normalized, case-insensitive."""
    return unicodedata.normalize("NFC", handle).lower()


def infer_mode(text: str) -> str:
    if text.startswith("#"):
        return "hashtag"
    if re.search(r"\s", text):
        return "phrase"
    return "token"


@dataclass(frozen=True)
class Selector:
    """A tracked keyword, hashtag or multi-word phrase."""

    text: str
    mode: str
    category: str

    @classmethod
    def make(cls, text: str, category: str) -> "Selector":
        return cls(text=text, mode=infer_mode(text), category=category)


@dataclass
class Candidate:
    candidate_id: str
    full_name: str
    party: str
    state: str
    candidacy: str
    district: str | None = None
    account_refs: list[str] = field(default_factory=list)


@dataclass
class Account:
    account_id: str
    platform: str
    handle: str
    external_numeric_id: int | None = None
    role: str = "candidate"
    party: str | None = None
    candidate_id: str | None = None
    visibility: str = "public"
    active: bool = False
    page_likes: int | None = None


@dataclass
class Config:
    """Tunable collection parameters with the documented 2017 defaults."""

    rolling_window: timedelta = timedelta(days=8)
    retweet_cap: int = 100
    stream_cap_fraction: float = 0.01
    deletion_rate_user_content: float = 0.18
    deletion_rate_actor_posts: float = 0.023
    top_selectors_k: int = 20
    top_accounts_k: int = 5

    def validate(self) -> None:
        problems = []
        if self.rolling_window <= timedelta(0):
            problems.append("rolling_window must be strictly positive")
        if self.retweet_cap <= 0:
            problems.append("retweet_cap must be strictly positive")
        for name in ("stream_cap_fraction", "deletion_rate_user_content", "deletion_rate_actor_posts"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                problems.append(f"{name} must lie in [0, 1]")
        if self.stream_cap_fraction <= 0:
            problems.append("stream_cap_fraction must be strictly positive")
        if self.top_selectors_k <= 0 or self.top_accounts_k <= 0:
            problems.append("top-k counts must be strictly positive")
        if problems:
            raise ValueError("; ".join(problems))


def load_config(path: str | Path) -> Config:
    """Read a JSON config file; absent keys keep their defaults."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    cfg = Config()
    if "rolling_window_days" in raw:
        cfg.rolling_window = timedelta(days=float(raw["rolling_window_days"]))
    for name in (
        "retweet_cap",
        "stream_cap_fraction",
        "deletion_rate_user_content",
        "deletion_rate_actor_posts",
        "top_selectors_k",
        "top_accounts_k",
    ):
        if name in raw:
            setattr(cfg, name, type(getattr(cfg, name))(raw[name]))
    cfg.validate()
    return cfg


@dataclass
class Registry:
    """Immutable-after-load master lists plus derived lookup maps."""

    candidates: list[Candidate]
    accounts: list[Account]
    selectors: list[Selector]
    collection_period: tuple[datetime, datetime] = DEFAULT_PERIOD

    candidates_by_id: dict[str, Candidate] = field(default_factory=dict, compare=False, repr=False)
    accounts_by_id: dict[str, Account] = field(default_factory=dict, compare=False, repr=False)
    _by_handle: dict[tuple[str, str], Account] = field(default_factory=dict, compare=False, repr=False)
    _by_numeric: dict[tuple[str, int], Account] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        self.candidates_by_id = {c.candidate_id: c for c in self.candidates}
        self.accounts_by_id = {a.account_id: a for a in self.accounts}
        self._by_handle = {(a.platform, norm_handle(a.handle)): a for a in self.accounts}
        self._by_numeric = {
            (a.platform, a.external_numeric_id): a
            for a in self.accounts
            if a.external_numeric_id is not None
        }

    def account_for(self, platform: str, handle: str | None, numeric_id: int | None = None) -> Account | None:
        if handle is not None:
            acc = self._by_handle.get((platform, norm_handle(handle)))
            if acc is not None:
                return acc
        if numeric_id is not None:
            return self._by_numeric.get((platform, numeric_id))
        return None

    def party_of_account(self, account: Account) -> str | None:
        if account.party:
            return account.party
        if account.candidate_id:
            cand = self.candidates_by_id.get(account.candidate_id)
            if cand is not None:
                return cand.party
        return None

    def canonical_dict(self) -> dict:
        candidates = [
            {
                "candidate_id": c.candidate_id,
                "full_name": c.full_name,
                "party": c.party,
                "state": c.state,
                "candidacy": c.candidacy,
                "district": c.district,
                "account_refs": sorted(c.account_refs),
            }
            for c in self.candidates
        ]
        accounts = [
            {
                "account_id": a.account_id,
                "platform": a.platform,
                "handle": a.handle,
                "external_numeric_id": a.external_numeric_id,
                "role": a.role,
                "party": a.party,
                "candidate_id": a.candidate_id,
                "visibility": a.visibility,
                "active": a.active,
                "page_likes": a.page_likes,
            }
            for a in self.accounts
        ]
        return {
            "collection_period": [format_instant(t) for t in self.collection_period],
            "candidates": sorted(candidates, key=lambda r: r["candidate_id"]),
            "accounts": sorted(accounts, key=lambda r: r["account_id"]),
        }

    def version(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def selector_version(self) -> str:
        blob = json.dumps(
            sorted((s.text, s.mode, s.category) for s in self.selectors), ensure_ascii=False
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


CANDIDATE_COLUMNS = ["candidate_id", "full_name", "party", "state", "candidacy", "district"]
ACCOUNT_COLUMNS = [
    "account_id",
    "platform",
    "handle",
    "external_numeric_id",
    "role",
    "party",
    "candidate_id",
    "visibility",
]
ACCOUNT_OPTIONAL_COLUMNS = ["active", "page_likes"]


def _check_enum(value: str, allowed: Sequence[str], what: str, path, line) -> str:
    if value not in allowed:
        raise LoadError(f"unknown {what} {value!r}", path, line)
    return value


def load_candidates(path: str | Path) -> list[Candidate]:
    candidates: list[Candidate] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != CANDIDATE_COLUMNS:
            raise LoadError(f"expected header {','.join(CANDIDATE_COLUMNS)}", path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CANDIDATE_COLUMNS):
                raise LoadError(f"expected {len(CANDIDATE_COLUMNS)} fields, got {len(row)}", path, lineno)
            cid, name, party, state, candidacy, district = (v.strip() for v in row)
            if not cid:
                raise LoadError("empty candidate_id", path, lineno)
            if cid in seen:
                raise LoadError(f"duplicate candidate_id {cid!r}", path, lineno)
            seen.add(cid)
            _check_enum(party, PARTIES, "party", path, lineno)
            _check_enum(state, STATES, "state", path, lineno)
            _check_enum(candidacy, CANDIDACIES, "candidacy", path, lineno)
            candidates.append(
                Candidate(cid, name, party, state, candidacy, district or None)
            )
    return candidates


def load_accounts(path: str | Path) -> list[Account]:
    accounts: list[Account] = []
    seen_ids: set[str] = set()
    seen_handles: set[tuple[str, str]] = set()
    seen_numeric: set[tuple[str, int]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        stripped = [h.strip() for h in header] if header else []
        if stripped not in (
            ACCOUNT_COLUMNS,
            ACCOUNT_COLUMNS + ACCOUNT_OPTIONAL_COLUMNS[:1],
            ACCOUNT_COLUMNS + ACCOUNT_OPTIONAL_COLUMNS,
        ):
            raise LoadError(f"expected header starting {','.join(ACCOUNT_COLUMNS)}", path, 1)
        width = len(stripped)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise LoadError(f"expected {width} fields, got {len(row)}", path, lineno)
            values = [v.strip() for v in row]
            aid, platform, handle, ext_id, role, party, candidate_id, visibility = values[:8]
            if not aid:
                raise LoadError("empty account_id", path, lineno)
            if aid in seen_ids:
                raise LoadError(f"duplicate account_id {aid!r}", path, lineno)
            seen_ids.add(aid)
            _check_enum(platform, PLATFORMS, "platform", path, lineno)
            if not handle:
                raise LoadError("empty handle", path, lineno)
            key = (platform, norm_handle(handle))
            if key in seen_handles:
                raise LoadError(f"duplicate handle {handle!r} on {platform}", path, lineno)
            seen_handles.add(key)
            numeric: int | None = None
            if ext_id:
                try:
                    numeric = int(ext_id)
                except ValueError:
                    raise LoadError(f"bad external_numeric_id {ext_id!r}", path, lineno) from None
                nkey = (platform, numeric)
                if nkey in seen_numeric:
                    raise LoadError(f"duplicate external_numeric_id {numeric} on {platform}", path, lineno)
                seen_numeric.add(nkey)
            _check_enum(role, ROLES, "role", path, lineno)
            if party:
                _check_enum(party, PARTIES, "party", path, lineno)
            _check_enum(visibility, VISIBILITIES, "visibility", path, lineno)
            active = False
            page_likes: int | None = None
            if width >= 9 and values[8]:
                if values[8] not in ("true", "false"):
                    raise LoadError(f"bad active flag {values[8]!r}", path, lineno)
                active = values[8] == "true"
            if width >= 10 and values[9]:
                try:
                    page_likes = int(values[9])
                except ValueError:
                    raise LoadError(f"bad page_likes {values[9]!r}", path, lineno) from None
            accounts.append(
                Account(
                    account_id=aid,
                    platform=platform,
                    handle=handle,
                    external_numeric_id=numeric,
                    role=role,
                    party=party or None,
                    candidate_id=candidate_id or None,
                    visibility=visibility,
                    active=active,
                    page_likes=page_likes,
                )
            )
    return accounts


_SELECTOR_FILE_RE = re.compile(r"selectors?[_-](polity|policy|politics|parties)\.txt$")


def load_selectors(path: str | Path, default_category: str | None = None) -> list[Selector]:
    """One selector per line, ``text`` optionally followed by ``,category``.

    The category falls back to the one encoded in the filename
    (``selectors_<category>.txt``).
    """
    path = Path(path)
    if default_category is None:
        m = _SELECTOR_FILE_RE.search(path.name)
        if m:
            default_category = m.group(1)
    selectors: list[Selector] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if "," in line:
                text, category = (part.strip() for part in line.rsplit(",", 1))
                _check_enum(category, SELECTOR_CATEGORIES, "selector category", path, lineno)
            else:
                text, category = line, default_category
            if category is None:
                raise LoadError("no category on line and none implied by filename", path, lineno)
            if not text:
                raise LoadError("empty selector text", path, lineno)
            if text != text.lower():
                raise LoadError(f"selector {text!r} is not lowercase", path, lineno)
            if text.startswith("#") and re.search(r"\s", text):
                raise LoadError(f"hashtag selector {text!r} must not contain whitespace", path, lineno)
            selectors.append(Selector.make(text, category))
    return selectors


def load_registry(
    candidate_file: str | Path,
    account_file: str | Path,
    selector_files: Sequence[str | Path],
    collection_period: tuple[datetime, datetime] = DEFAULT_PERIOD,
) -> Registry:
    """Load and cross-link the master lists into a validated Registry."""
    candidates = load_candidates(candidate_file)
    accounts = load_accounts(account_file)
    selectors: list[Selector] = []
    for sf in selector_files:
        selectors.extend(load_selectors(sf))

    by_cid = {c.candidate_id: c for c in candidates}
    for acc in accounts:
        if acc.candidate_id is not None:
            cand = by_cid.get(acc.candidate_id)
            if cand is None:
                raise LoadError(
                    f"account {acc.account_id!r} references unknown candidate {acc.candidate_id!r}",
                    account_file,
                )
            cand.account_refs.append(acc.account_id)
            if acc.party is None:
                acc.party = cand.party
        elif acc.role == "candidate":
            raise LoadError(
                f"account {acc.account_id!r} has role=candidate but no candidate_id", account_file
            )
    return Registry(candidates, accounts, selectors, collection_period)


def load_registry_dir(
    directory: str | Path, collection_period: tuple[datetime, datetime] = DEFAULT_PERIOD
) -> Registry:
    """Load a registry from a directory laid out like a shared manifest."""
    directory = Path(directory)
    selector_files = sorted(directory.glob("selectors_*.txt"))
    return load_registry(
        directory / "candidates.csv", directory / "accounts.csv", selector_files, collection_period
    )


def save_registry(registry: Registry, directory: str | Path) -> None:
    """Write the master lists back out in their load formats."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "candidates.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CANDIDATE_COLUMNS)
        for c in registry.candidates:
            writer.writerow([c.candidate_id, c.full_name, c.party, c.state, c.candidacy, c.district or ""])
    extended = any(a.active or a.page_likes is not None for a in registry.accounts)
    with open(directory / "accounts.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ACCOUNT_COLUMNS + (ACCOUNT_OPTIONAL_COLUMNS if extended else []))
        for a in registry.accounts:
            row = [
                a.account_id,
                a.platform,
                a.handle,
                "" if a.external_numeric_id is None else a.external_numeric_id,
                a.role,
                a.party or "",
                a.candidate_id or "",
                a.visibility,
            ]
            if extended:
                row += ["true" if a.active else "false", "" if a.page_likes is None else a.page_likes]
            writer.writerow(row)
    for category in SELECTOR_CATEGORIES:
        lines = [s.text for s in registry.selectors if s.category == category]
        (directory / f"selectors_{category}.txt").write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8"
        )


@dataclass(frozen=True)
class Finding:
    entity_id: str
    rule: str
    detail: str = ""


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def add(self, entity_id: str, rule: str, detail: str = "") -> None:
        self.findings.append(Finding(entity_id, rule, detail))


def validate_registry(registry: Registry) -> ValidationReport:
    """Check every registry invariant; findings are data, not failures."""
    report = ValidationReport()

    for cand in registry.candidates:
        if cand.party not in PARTIES:
            report.add(cand.candidate_id, "unknown_party", cand.party)
        if cand.state not in STATES:
            report.add(cand.candidate_id, "unknown_state", cand.state)
        if cand.candidacy not in CANDIDACIES:
            report.add(cand.candidate_id, "unknown_candidacy", cand.candidacy)
        counts = {"twitter": 0, "facebook": 0}
        for ref in cand.account_refs:
            acc = registry.accounts_by_id.get(ref)
            if acc is None:
                report.add(cand.candidate_id, "dangling_account_ref", ref)
            else:
                counts[acc.platform] = counts.get(acc.platform, 0) + 1
        if counts["twitter"] > 1:
            report.add(cand.candidate_id, "twitter_account_limit", f"{counts['twitter']} twitter accounts")
        if counts["facebook"] > 2:
            report.add(cand.candidate_id, "facebook_account_limit", f"{counts['facebook']} facebook accounts")

    seen_handles: dict[tuple[str, str], str] = {}
    seen_numeric: dict[tuple[str, int], str] = {}
    for acc in registry.accounts:
        if acc.platform not in PLATFORMS:
            report.add(acc.account_id, "unknown_platform", acc.platform)
        if acc.role not in ROLES:
            report.add(acc.account_id, "unknown_role", acc.role)
        if acc.visibility not in VISIBILITIES:
            report.add(acc.account_id, "unknown_visibility", acc.visibility)
        if acc.party is not None and acc.party not in PARTIES:
            report.add(acc.account_id, "unknown_party", acc.party)
        key = (acc.platform, norm_handle(acc.handle))
        if key in seen_handles:
            report.add(acc.account_id, "duplicate_handle", f"also on {seen_handles[key]}")
        seen_handles[key] = acc.account_id
        if acc.external_numeric_id is not None:
            nkey = (acc.platform, acc.external_numeric_id)
            if nkey in seen_numeric:
                report.add(acc.account_id, "duplicate_numeric_id", f"also on {seen_numeric[nkey]}")
            seen_numeric[nkey] = acc.account_id
        if acc.role == "candidate":
            if acc.candidate_id is None:
                report.add(acc.account_id, "missing_candidate_backref")
            elif acc.candidate_id not in registry.candidates_by_id:
                report.add(acc.account_id, "dangling_candidate_ref", acc.candidate_id)
            elif acc.account_id not in registry.candidates_by_id[acc.candidate_id].account_refs:
                report.add(acc.account_id, "orphan_candidate_account", acc.candidate_id)

    for sel in registry.selectors:
        if not sel.text or sel.text != sel.text.strip() or sel.text != sel.text.lower():
            report.add(sel.text, "selector_not_normalized")
        if sel.category not in SELECTOR_CATEGORIES:
            report.add(sel.text, "unknown_selector_category", sel.category)
        if sel.mode != infer_mode(sel.text):
            report.add(sel.text, "selector_mode_mismatch", f"{sel.mode} != {infer_mode(sel.text)}")
    return report


@dataclass(frozen=True)
class AdoptionRow:
    party: str
    candidates: int
    fb_accounts: int
    public_active_fb: int
    tw_accounts: int
    public_active_tw: int


@dataclass
class AdoptionTable:
    rows: list[AdoptionRow]
    total: AdoptionRow


def registry_summary(registry: Registry) -> AdoptionTable:
    """Per-party social media adoption counts.

    Each platform column counts candidates: having at least one account
    there, and having at least one public account that was active during
    the collection period.
    """
    rows = []
    for party in sorted(PARTIES):
        cands = [c for c in registry.candidates if c.party == party]
        fb = fb_active = tw = tw_active = 0
        for cand in cands:
            accs = [registry.accounts_by_id[r] for r in cand.account_refs if r in registry.accounts_by_id]
            fb_accs = [a for a in accs if a.platform == "facebook"]
            tw_accs = [a for a in accs if a.platform == "twitter"]
            fb += bool(fb_accs)
            tw += bool(tw_accs)
            fb_active += any(a.visibility == "public" and a.active for a in fb_accs)
            tw_active += any(a.visibility == "public" and a.active for a in tw_accs)
        rows.append(AdoptionRow(party, len(cands), fb, fb_active, tw, tw_active))
    total = AdoptionRow(
        "Total",
        sum(r.candidates for r in rows),
        sum(r.fb_accounts for r in rows),
        sum(r.public_active_fb for r in rows),
        sum(r.tw_accounts for r in rows),
        sum(r.public_active_tw for r in rows),
    )
    return AdoptionTable(rows, total)


def apply_activity(registry: Registry, posts: Iterable) -> Registry:
    """Return a registry copy with account.active = "authored >= 1 stored post
    inside the collection period"."""
    start, end = registry.collection_period
    active_keys: set[tuple[str, str]] = set()
    for post in posts:
        if start <= post.created_at <= end:
            active_keys.add((post.platform, norm_handle(post.author_handle)))
    accounts = []
    for acc in registry.accounts:
        updated = Account(**{**acc.__dict__})
        updated.active = (acc.platform, norm_handle(acc.handle)) in active_keys
        accounts.append(updated)
    candidates = [
        Candidate(c.candidate_id, c.full_name, c.party, c.state, c.candidacy, c.district, list(c.account_refs))
        for c in registry.candidates
    ]
    return Registry(candidates, accounts, list(registry.selectors), registry.collection_period)


def adoption_csv(table: AdoptionTable) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["party", "candidates", "fb_accounts", "public_active_fb", "tw_accounts", "public_active_tw"])
    for row in list(table.rows) + [table.total]:
        writer.writerow([row.party, row.candidates, row.fb_accounts, row.public_active_fb, row.tw_accounts, row.public_active_tw])
    return out.getvalue()
