"""Web search behind a minimal JSON contract.

The provider answers ``GET <SEARCH_API_BASE>?q=<query>&k=<k>`` with a JSON
array of ``{title, url, snippet}`` rows in rank order; ``SEARCH_API_KEY`` is
sent as an ``X-Api-Key`` header when present. Fixture mode reads the same
JSON shape from ``<fixture_dir>/<query slug>.json``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import requests

from ..errors import BackendUnavailable, QuotaExceeded, Timeout
from ..util import slugify

K_CAP = 10


@dataclass(frozen=True)
class SearchResult:
    rank: int
    title: str
    url: str
    snippet: str

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if not self.url:
            raise ValueError("url must be non-empty")

    def to_dict(self) -> dict:
        return {"rank": self.rank, "title": self.title, "url": self.url, "snippet": self.snippet}


def _results_from_rows(rows, k: int) -> list[SearchResult]:
    """Map provider rows to ranked results: dedupe URLs, recompact ranks."""
    if not isinstance(rows, list):
        raise BackendUnavailable("search provider returned a non-array response")
    results: list[SearchResult] = []
    seen: set[str] = set()
    for row in rows:
        if not isinstance(row, dict):
            continue
        url = row.get("url")
        if not url or url in seen:
            continue
        seen.add(url)
        results.append(SearchResult(
            rank=len(results) + 1,
            title=str(row.get("title", "")),
            url=str(url),
            snippet=str(row.get("snippet", "")),
        ))
        if len(results) == k:
            break
    return results


class SearchClient:
    def __init__(self, mode: str = "fixture", fixture_dir: Path | None = None,
                 counter=None, *, api_base: str | None = None, timeout_s: float = 10.0,
                 session: requests.Session | None = None):
        if mode not in ("fixture", "live"):
            raise ValueError(f"mode must be fixture or live, got {mode!r}")
        if mode == "fixture" and fixture_dir is None:
            raise ValueError("fixture mode requires a fixture_dir")
        self.mode = mode
        self.fixture_dir = Path(fixture_dir) if fixture_dir is not None else None
        self.counter = counter
        self.timeout_s = timeout_s
        self._api_base = api_base
        self._session = session or requests.Session()

    @property
    def api_base(self) -> str:
        base = self._api_base or os.environ.get("SEARCH_API_BASE", "")
        if not base:
            raise BackendUnavailable("SEARCH_API_BASE is not configured")
        return base

    def search(self, query: str, k: int = 5) -> list[SearchResult]:
        """Top-k results for a query; deduplicated, ranks 1..len."""
        if not query or not query.strip():
            raise ValueError("query must be non-empty")
        if not 1 <= k <= K_CAP:
            raise ValueError(f"k must be within 1..{K_CAP}")
        if self.counter is not None:
            self.counter.increment("search")
        if self.mode == "fixture":
            path = self.fixture_dir / (slugify(query) + ".json")
            if not path.exists():
                raise BackendUnavailable(f"no search fixture for query {query!r}")
            try:
                rows = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise BackendUnavailable(f"bad search fixture {path}: {exc}") from exc
            return _results_from_rows(rows, k)
        headers = {}
        api_key = os.environ.get("SEARCH_API_KEY", "")
        if api_key:
            headers["X-Api-Key"] = api_key
        try:
            resp = self._session.get(self.api_base, params={"q": query, "k": k},
                                     headers=headers, timeout=self.timeout_s)
        except requests.Timeout as exc:
            raise Timeout(f"search exceeded {self.timeout_s}s") from exc
        except requests.RequestException as exc:
            raise BackendUnavailable(f"search failed: {exc}") from exc
        if resp.status_code == 429:
            raise QuotaExceeded("search provider quota exhausted")
        if resp.status_code != 200:
            raise BackendUnavailable(f"search provider returned {resp.status_code}")
        try:
            rows = resp.json()
        except ValueError as exc:
            raise BackendUnavailable(f"search provider returned non-JSON: {exc}") from exc
        return _results_from_rows(rows, k)
