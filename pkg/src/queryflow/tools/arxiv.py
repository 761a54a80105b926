"""arXiv search over the public Atom feed, with an offline fixture mode."""

from __future__ import annotations

import json
import os
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import requests

from ..errors import BackendUnavailable, Timeout
from ..util import slugify

ATOM_NS = {"atom": "http://www.w3.org/2005/Atom"}
DEFAULT_API_BASE = "http://export.arxiv.org/api/query"
MAX_RESULTS_CAP = 50


@dataclass(frozen=True)
class ArxivEntry:
    arxiv_id: str
    title: str
    abstract: str
    authors: tuple[str, ...]
    published: str
    link: str

    def __post_init__(self):
        if not self.arxiv_id:
            raise ValueError("arxiv_id must be non-empty")
        if not self.link.startswith("https://"):
            raise ValueError("link must be an absolute https URL")
        date.fromisoformat(self.published)

    def to_dict(self) -> dict:
        return {
            "arxiv_id": self.arxiv_id,
            "title": self.title,
            "abstract": self.abstract,
            "authors": list(self.authors),
            "published": self.published,
            "link": self.link,
        }


def _collapse(text: str | None) -> str:
    return " ".join((text or "").split())


def _entry_from_element(element: ET.Element) -> ArxivEntry:
    id_url = _collapse(element.findtext("atom:id", namespaces=ATOM_NS))
    arxiv_id = id_url.rstrip("/").rsplit("/", 1)[-1]
    published_raw = _collapse(element.findtext("atom:published", namespaces=ATOM_NS))
    published = published_raw[:10]
    authors = tuple(
        _collapse(name.text)
        for name in element.findall("atom:author/atom:name", namespaces=ATOM_NS)
        if _collapse(name.text)
    )
    link = ""
    for link_el in element.findall("atom:link", namespaces=ATOM_NS):
        if link_el.get("type") == "text/html" or link_el.get("rel") == "alternate":
            link = link_el.get("href", "")
            break
    if not link:
        link = id_url
    if link.startswith("http://"):
        link = "https://" + link[len("http://"):]
    return ArxivEntry(
        arxiv_id=arxiv_id,
        title=_collapse(element.findtext("atom:title", namespaces=ATOM_NS)),
        abstract=_collapse(element.findtext("atom:summary", namespaces=ATOM_NS)),
        authors=authors,
        published=published,
        link=link,
    )


def parse_atom_feed(xml_text: str) -> list[ArxivEntry]:
    """Entries of an Atom feed, in feed order. Zero entries is a valid result."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise BackendUnavailable(f"unparseable feed: {exc}") from exc
    try:
        return [_entry_from_element(el) for el in root.findall("atom:entry", namespaces=ATOM_NS)]
    except ValueError as exc:
        raise BackendUnavailable(f"feed entry failed validation: {exc}") from exc


def entries_to_json(entries: list[ArxivEntry]) -> str:
    """Canonical serialized form, used for round-trip golden comparisons."""
    return json.dumps([entry.to_dict() for entry in entries], indent=2, ensure_ascii=False) + "\n"


class ArxivClient:
    """Topic search against the Atom API or a local fixture directory.

    Fixture mode maps a topic to ``<fixture_dir>/<topic slug>.xml``; a
    missing fixture raises BackendUnavailable so unscripted topics fail
    loudly instead of returning a silent empty feed.
    """

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
        return self._api_base or os.environ.get("ARXIV_API_BASE", DEFAULT_API_BASE)

    def search(self, topic: str, max_results: int = 10) -> list[ArxivEntry]:
        if not topic or not topic.strip():
            raise ValueError("topic must be non-empty")
        if not 1 <= max_results <= MAX_RESULTS_CAP:
            raise ValueError(f"max_results must be within 1..{MAX_RESULTS_CAP}")
        if self.counter is not None:
            self.counter.increment("arxiv")
        if self.mode == "fixture":
            path = self.fixture_dir / (slugify(topic) + ".xml")
            if not path.exists():
                raise BackendUnavailable(f"no arxiv fixture for topic {topic!r}")
            return parse_atom_feed(path.read_text(encoding="utf-8"))[:max_results]
        params = {"search_query": f"all:{topic}", "start": 0, "max_results": max_results}
        try:
            resp = self._session.get(self.api_base, params=params, timeout=self.timeout_s)
        except requests.Timeout as exc:
            raise Timeout(f"arxiv query exceeded {self.timeout_s}s") from exc
        except requests.RequestException as exc:
            raise BackendUnavailable(f"arxiv query failed: {exc}") from exc
        if resp.status_code != 200:
            raise BackendUnavailable(f"arxiv API returned {resp.status_code}")
        return parse_atom_feed(resp.text)[:max_results]
