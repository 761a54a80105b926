"""Query-keyed persistence of distilled answers, plus multi-query retrieval.

The store is an append-only JSONL log (``entries.jsonl``) keyed by the token
set of the normalized query. Lookup is Jaccard similarity over those token
sets against a threshold; repeat queries with minor rephrasings land on the
same entry without any backend call. ``mirror`` syncs the log into a second
directory so the cache survives the primary machine.

multi_query_retrieve expands a query into LLM-written variants, searches all
phrasings and fuses the rankings by summed reciprocal rank, which rewards
URLs that several phrasings agree on.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .errors import (
    BackendUnavailable,
    MirrorUnavailable,
    QueryflowError,
    StoreCorrupt,
    StoreIoFailure,
)
from .prompts import tokenize
from .tools.search import SearchClient, SearchResult

log = logging.getLogger(__name__)

DEFAULT_SIMILARITY_THRESHOLD = 0.75
STORE_FILENAME = "entries.jsonl"

_LIST_MARKER_RE = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s*")


def similarity(query_a: str, query_b: str) -> float:
    """Jaccard similarity of normalized token sets.

    Two empty token sets count as identical (1.0); exactly one empty set
    shares nothing (0.0). Symmetric, bounded to [0, 1], 1.0 on self.
    """
    tokens_a = set(tokenize(query_a))
    tokens_b = set(tokenize(query_b))
    if not tokens_a and not tokens_b:
        return 1.0
    if not tokens_a or not tokens_b:
        return 0.0
    return len(tokens_a & tokens_b) / len(tokens_a | tokens_b)


@dataclass(frozen=True)
class CacheEntry:
    query: str
    key_info: str
    sources: tuple[str, ...]
    created_at: str
    fingerprint: str

    @property
    def key_tokens(self) -> frozenset[str]:
        return frozenset(tokenize(self.query))

    def to_json_line(self) -> str:
        row = {
            "query": self.query,
            "key_info": self.key_info,
            "sources": list(self.sources),
            "created_at": self.created_at,
            "fingerprint": self.fingerprint,
            "key_tokens": sorted(self.key_tokens),
        }
        return json.dumps(row, ensure_ascii=False)

    @classmethod
    def from_json_line(cls, line: str) -> "CacheEntry":
        row = json.loads(line)
        if not isinstance(row, dict):
            raise ValueError("entry line is not an object")
        for field_name in ("query", "key_info", "created_at", "fingerprint"):
            if not isinstance(row.get(field_name), str):
                raise ValueError(f"field {field_name!r} missing or not a string")
        if not row["key_info"].strip():
            raise ValueError("key_info is empty")
        sources = row.get("sources")
        if not isinstance(sources, list) or not all(isinstance(s, str) for s in sources):
            raise ValueError("sources must be a list of strings")
        entry = cls(
            query=row["query"],
            key_info=row["key_info"],
            sources=tuple(sources),
            created_at=row["created_at"],
            fingerprint=row["fingerprint"],
        )
        stored_tokens = row.get("key_tokens")
        if stored_tokens is not None and sorted(entry.key_tokens) != sorted(stored_tokens):
            raise ValueError("key_tokens do not match the query tokenization")
        return entry


class CacheStore:
    """Append-only entry log with similarity lookup.

    Individually bad lines in the log are skipped and counted
    (``skipped_lines``); a log file that cannot be read at all raises
    StoreCorrupt. Appends are written before the in-memory index is updated,
    so a failed write never leaves a phantom entry visible to lookup.
    """

    def __init__(self, cache_dir: Path, threshold: float = DEFAULT_SIMILARITY_THRESHOLD):
        if not 0.0 < threshold <= 1.0:
            raise ValueError("threshold must be within (0, 1]")
        self.cache_dir = Path(cache_dir)
        self.threshold = threshold
        self.skipped_lines = 0
        self._entries: list[CacheEntry] = []
        self._last_created: datetime | None = None
        self._load()

    @property
    def store_path(self) -> Path:
        return self.cache_dir / STORE_FILENAME

    def _load(self) -> None:
        if not self.store_path.exists():
            return
        try:
            content = self.store_path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise StoreCorrupt(f"cannot read {self.store_path}: {exc}") from exc
        for line_no, line in enumerate(content.splitlines(), 1):
            if not line.strip():
                continue
            try:
                self._entries.append(CacheEntry.from_json_line(line))
            except (json.JSONDecodeError, ValueError) as exc:
                self.skipped_lines += 1
                log.warning("cache: skipping bad line %d in %s: %s", line_no, self.store_path, exc)

    def __len__(self) -> int:
        return len(self._entries)

    def _next_created_at(self) -> str:
        # strictly increasing so "most recent wins" tie-breaks stay total
        now = datetime.now(timezone.utc)
        if self._last_created is not None and now <= self._last_created:
            now = self._last_created + timedelta(microseconds=1)
        self._last_created = now
        return now.isoformat(timespec="microseconds")

    def store(self, query: str, key_info: str, sources: list[str],
              fingerprint: str = "") -> CacheEntry:
        """Append one entry; on write failure nothing becomes visible."""
        if not key_info or not key_info.strip():
            raise ValueError("key_info must be non-empty")
        entry = CacheEntry(
            query=query,
            key_info=key_info,
            sources=tuple(sources),
            created_at=self._next_created_at(),
            fingerprint=fingerprint,
        )
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
            with open(self.store_path, "a", encoding="utf-8") as handle:
                handle.write(entry.to_json_line() + "\n")
                handle.flush()
        except OSError as exc:
            raise StoreIoFailure(f"cannot append to {self.store_path}: {exc}") from exc
        self._entries.append(entry)
        return entry

    def entries(self) -> list[CacheEntry]:
        """Loaded entries in append order (a copy; the store stays append-only)."""
        return list(self._entries)

    def lookup(self, query: str, threshold: float | None = None) -> CacheEntry | None:
        """Best entry at or above the similarity threshold, or None.

        Equal-similarity ties prefer the most recent created_at, then the
        lexicographically smallest stored query.
        """
        threshold = self.threshold if threshold is None else threshold
        if not 0.0 < threshold <= 1.0:
            raise ValueError("threshold must be within (0, 1]")
        candidates = [
            (similarity(query, entry.query), entry)
            for entry in self._entries
        ]
        candidates = [(score, entry) for score, entry in candidates if score >= threshold]
        if not candidates:
            return None
        candidates.sort(key=lambda pair: pair[1].query)
        candidates.sort(key=lambda pair: pair[1].created_at, reverse=True)
        candidates.sort(key=lambda pair: pair[0], reverse=True)
        return candidates[0][1]

    def clear(self) -> int:
        """Drop every entry; returns how many were dropped."""
        count = len(self._entries)
        self._entries = []
        self.skipped_lines = 0
        try:
            if self.store_path.exists():
                self.store_path.unlink()
        except OSError as exc:
            raise StoreIoFailure(f"cannot clear {self.store_path}: {exc}") from exc
        return count

    def _raw_lines(self) -> list[str]:
        if not self.store_path.exists():
            return []
        try:
            return [line for line in self.store_path.read_text(encoding="utf-8").splitlines()
                    if line.strip()]
        except (OSError, UnicodeDecodeError) as exc:
            raise StoreCorrupt(f"cannot read {self.store_path}: {exc}") from exc

    def mirror(self, target: "LocalDirMirror") -> int:
        """Idempotent full sync of the log into the mirror; returns lines copied.

        Mirror failures raise MirrorUnavailable and leave the primary store
        untouched.
        """
        return target.sync(self._raw_lines())


class LocalDirMirror:
    """Mirror backend writing the same JSONL log into another directory."""

    def __init__(self, path: Path):
        self.path = Path(path)

    @property
    def store_path(self) -> Path:
        return self.path / STORE_FILENAME

    def sync(self, lines: list[str]) -> int:
        try:
            self.path.mkdir(parents=True, exist_ok=True)
            existing: list[str] = []
            if self.store_path.exists():
                existing = [line for line in
                            self.store_path.read_text(encoding="utf-8").splitlines()
                            if line.strip()]
            if existing == lines[:len(existing)]:
                fresh = lines[len(existing):]
                if not fresh:
                    return 0
                with open(self.store_path, "a", encoding="utf-8") as handle:
                    handle.write("".join(line + "\n" for line in fresh))
                return len(fresh)
            # diverged target: rewrite wholesale
            self.store_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
            return len(lines)
        except (OSError, UnicodeDecodeError) as exc:
            raise MirrorUnavailable(f"mirror at {self.path} is unusable: {exc}") from exc


@dataclass(frozen=True)
class RetrievedDoc:
    url: str
    snippet: str
    score: float
    provenance: str
    title: str = ""

    def __post_init__(self):
        if self.provenance not in ("search", "cache"):
            raise ValueError("provenance must be 'search' or 'cache'")
        if self.score <= 0:
            raise ValueError("score must be positive")


def parse_query_variants(text: str, n_variants: int, original: str) -> list[str]:
    """Variant queries from an LLM reply: one per line, malformed lines dropped.

    List markers are tolerated and stripped; blank lines and duplicates of
    the original or of each other are dropped; at most n_variants survive.
    """
    if n_variants <= 0:
        return []
    variants: list[str] = []
    seen = {original}
    for line in text.splitlines():
        candidate = _LIST_MARKER_RE.sub("", line).strip()
        if not candidate or candidate in seen:
            continue
        seen.add(candidate)
        variants.append(candidate)
        if len(variants) == n_variants:
            break
    return variants


def fuse_rankings(result_lists: list[list[SearchResult]], k: int) -> list[RetrievedDoc]:
    """Reciprocal-rank fusion: score(url) = sum over lists of 1/rank.

    Sorted by score descending with URL as the lexicographic tie-break,
    truncated to k. URLs are unique in the output; the first-seen title and
    snippet are kept.
    """
    scores: dict[str, float] = {}
    meta: dict[str, SearchResult] = {}
    for results in result_lists:
        for result in results:
            scores[result.url] = scores.get(result.url, 0.0) + 1.0 / result.rank
            meta.setdefault(result.url, result)
    docs = [
        RetrievedDoc(url=url, snippet=meta[url].snippet, score=score,
                     provenance="search", title=meta[url].title)
        for url, score in scores.items()
    ]
    docs.sort(key=lambda doc: (-doc.score, doc.url))
    return docs[:k]


def multi_query_retrieve(query: str, llm, search: SearchClient, templates, *,
                         n_variants: int = 0, k: int = 5,
                         trace=None) -> list[RetrievedDoc]:
    """Search the query plus LLM-generated variants and fuse the rankings.

    ``n_variants=0`` skips the LLM call entirely. Individual search failures
    degrade (noted on the trace); only when every search fails does the
    error propagate.
    """
    if n_variants < 0:
        raise ValueError("n_variants must be >= 0")
    queries = [query]
    if n_variants > 0:
        prompt = templates.render("multi_query", question=query, n=str(n_variants))
        text = llm.complete_text(prompt, temperature=0.0, n=1)[0]
        queries.extend(parse_query_variants(text, n_variants, query))
    result_lists: list[list[SearchResult]] = []
    failures: list[str] = []
    for candidate in queries:
        try:
            result_lists.append(search.search(candidate, k))
        except QueryflowError as exc:
            failures.append(f"{candidate!r}: {exc}")
    if not result_lists:
        raise BackendUnavailable(
            f"all {len(queries)} searches failed: {'; '.join(failures)}")
    if failures and trace is not None:
        trace.add("multi_query_retrieve",
                  note=f"degraded: {len(failures)}/{len(queries)} searches failed")
    return fuse_rankings(result_lists, k)
