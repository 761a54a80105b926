"""Web page tooling: fetching, heading outlines, main-text extraction, summaries.

Parsing builds on the stdlib's forgiving HTMLParser, so unclosed tags and
stray markup degrade gracefully instead of failing. Heading extraction keeps
document order; the nesting rule is purely level-based: each heading becomes
a child of the nearest preceding heading with a strictly smaller level, else
a root.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from html.parser import HTMLParser
from pathlib import Path

import requests

from ..errors import BackendUnavailable, HttpError, NotHtml, Timeout, TooLarge
from ..prompts import extract_marked_answer

HEADING_TAGS = {"h1", "h2", "h3", "h4", "h5", "h6"}

# boilerplate containers dropped wholesale, plus head metadata
STRIP_TAGS = {"script", "style", "nav", "header", "footer", "aside",
              "head", "title", "noscript", "template", "iframe"}

BLOCK_TAGS = {"address", "article", "blockquote", "br", "dd", "div", "dl", "dt",
              "fieldset", "figcaption", "figure", "form", "h1", "h2", "h3", "h4",
              "h5", "h6", "hr", "li", "main", "ol", "p", "pre", "section",
              "table", "tbody", "td", "tfoot", "th", "thead", "tr", "ul"}

PAGE_SIZE_CAP_BYTES = 5 * 1024 * 1024
MAX_REDIRECTS = 5
SUMMARY_CHAR_CAP = 12000
TRUNCATION_MARK = "[truncated]"


@dataclass
class HeadingNode:
    level: int
    text: str
    children: list["HeadingNode"] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"level": self.level, "text": self.text,
                "children": [child.to_dict() for child in self.children]}


@dataclass
class HeadingTree:
    roots: list[HeadingNode] = field(default_factory=list)

    def to_json_list(self) -> list[dict]:
        return [root.to_dict() for root in self.roots]

    def to_outline(self) -> str:
        """Indented text outline, two spaces per depth level."""
        lines: list[str] = []

        def walk(node: HeadingNode, depth: int) -> None:
            lines.append("  " * depth + node.text)
            for child in node.children:
                walk(child, depth + 1)

        for root in self.roots:
            walk(root, 0)
        return "\n".join(lines)

    def iter_preorder(self):
        def walk(node: HeadingNode):
            yield node
            for child in node.children:
                yield from walk(child)

        for root in self.roots:
            yield from walk(root)


@dataclass
class PageText:
    """Boilerplate-stripped main text of a page."""

    url: str
    text: str
    fetched_at: str


class _HeadingCollector(HTMLParser):
    """Flat (level, text) pairs in document order."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.headings: list[tuple[int, str]] = []
        self._level: int | None = None
        self._chunks: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag in HEADING_TAGS:
            self._flush()
            self._level = int(tag[1])

    def handle_endtag(self, tag):
        if tag in HEADING_TAGS:
            self._flush()

    def handle_data(self, data):
        if self._level is not None:
            self._chunks.append(data)

    def close(self):
        super().close()
        self._flush()

    def _flush(self):
        if self._level is not None:
            text = " ".join("".join(self._chunks).split())
            self.headings.append((self._level, text))
        self._level = None
        self._chunks = []


def extract_headings(html: str) -> HeadingTree:
    """h1..h6 outline of a document; an empty tree for heading-free input.

    Each heading's text is its concatenated descendant text, trimmed, with
    whitespace runs collapsed. Pre-order traversal of the tree reproduces
    document order, and children always have a strictly larger level than
    their parent.
    """
    collector = _HeadingCollector()
    collector.feed(html)
    collector.close()
    tree = HeadingTree()
    stack: list[HeadingNode] = []
    for level, text in collector.headings:
        node = HeadingNode(level, text)
        while stack and stack[-1].level >= level:
            stack.pop()
        if stack:
            stack[-1].children.append(node)
        else:
            tree.roots.append(node)
        stack.append(node)
    return tree


class _MainTextCollector(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self._skip = 0
        self._parts: list[str] = []

    def handle_starttag(self, tag, attrs):
        if tag in STRIP_TAGS:
            self._skip += 1
            return
        if self._skip == 0 and tag in BLOCK_TAGS:
            self._parts.append("\n")

    def handle_startendtag(self, tag, attrs):
        # self-closing elements have no subtree to strip
        if self._skip == 0 and tag in BLOCK_TAGS:
            self._parts.append("\n")

    def handle_endtag(self, tag):
        if tag in STRIP_TAGS:
            if self._skip > 0:
                self._skip -= 1
            return
        if self._skip == 0 and tag in BLOCK_TAGS:
            self._parts.append("\n")

    def handle_data(self, data):
        if self._skip == 0:
            self._parts.append(data)

    def text(self) -> str:
        lines = (" ".join(part.split()) for part in "".join(self._parts).split("\n"))
        return "\n".join(line for line in lines if line)


def extract_main_text(html: str, url: str = "") -> PageText:
    """Readable body text: boilerplate subtrees dropped, one line per block.

    script/style/nav/header/footer/aside subtrees (plus head metadata) are
    removed entirely; the remaining text is split at block-element
    boundaries, each line is whitespace-collapsed, and blank-line runs are
    collapsed away.
    """
    collector = _MainTextCollector()
    collector.feed(html)
    collector.close()
    return PageText(url=url, text=collector.text(),
                    fetched_at=datetime.now(timezone.utc).isoformat(timespec="seconds"))


def fetch_page(url: str, *, timeout_s: float = 10.0,
               max_bytes: int = PAGE_SIZE_CAP_BYTES,
               max_redirects: int = MAX_REDIRECTS,
               session: requests.Session | None = None) -> str:
    """Raw HTML of a live page. Follows up to ``max_redirects`` redirects.

    Raises HttpError(status) on a non-200 answer, NotHtml on a non-HTML
    content type, TooLarge past the byte cap, Timeout past the deadline and
    BackendUnavailable on transport failures.
    """
    sess = session or requests.Session()
    sess.max_redirects = max_redirects
    try:
        resp = sess.get(url, timeout=timeout_s, stream=True, allow_redirects=True)
    except requests.Timeout as exc:
        raise Timeout(f"fetch of {url} exceeded {timeout_s}s") from exc
    except requests.TooManyRedirects as exc:
        raise BackendUnavailable(f"more than {max_redirects} redirects fetching {url}") from exc
    except requests.RequestException as exc:
        raise BackendUnavailable(f"fetch of {url} failed: {exc}") from exc
    with resp:
        if resp.status_code != 200:
            raise HttpError(resp.status_code, f"GET {url} returned {resp.status_code}")
        content_type = resp.headers.get("content-type", "")
        if "html" not in content_type.lower():
            raise NotHtml(f"GET {url} returned content type {content_type!r}")
        declared = resp.headers.get("content-length")
        if declared and declared.isdigit() and int(declared) > max_bytes:
            raise TooLarge(f"{url} declares {declared} bytes, cap is {max_bytes}")
        chunks: list[bytes] = []
        size = 0
        for chunk in resp.iter_content(chunk_size=65536):
            size += len(chunk)
            if size > max_bytes:
                raise TooLarge(f"{url} exceeded the {max_bytes} byte cap")
            chunks.append(chunk)
        encoding = resp.encoding or "utf-8"
    return b"".join(chunks).decode(encoding, errors="replace")


class WebClient:
    """Mode-switched page fetcher: live HTTP or a local fixture directory.

    Fixture mode maps a URL to ``<fixture_dir>/<url slug>.html``; a missing
    file behaves as a 404 so error paths stay exercised offline.
    """

    def __init__(self, mode: str = "fixture", fixture_dir: Path | None = None,
                 counter=None, *, timeout_s: float = 10.0,
                 max_bytes: int = PAGE_SIZE_CAP_BYTES,
                 politeness_delay_s: float = 0.0,
                 session: requests.Session | None = None):
        if mode not in ("fixture", "live"):
            raise ValueError(f"mode must be fixture or live, got {mode!r}")
        if mode == "fixture" and fixture_dir is None:
            raise ValueError("fixture mode requires a fixture_dir")
        self.mode = mode
        self.fixture_dir = Path(fixture_dir) if fixture_dir is not None else None
        self.counter = counter
        self.timeout_s = timeout_s
        self.max_bytes = max_bytes
        self.politeness_delay_s = politeness_delay_s
        self._session = session

    def fetch_page(self, url: str) -> str:
        if self.counter is not None:
            self.counter.increment("web")
        if self.mode == "fixture":
            from ..util import url_slug

            path = self.fixture_dir / (url_slug(url) + ".html")
            if not path.exists():
                raise HttpError(404, f"no page fixture for {url}")
            return path.read_text(encoding="utf-8")
        if self.politeness_delay_s > 0:
            time.sleep(self.politeness_delay_s)
        return fetch_page(url, timeout_s=self.timeout_s, max_bytes=self.max_bytes,
                          session=self._session)


def summarize_page(url: str, llm, web: WebClient, templates, *,
                   char_cap: int = SUMMARY_CHAR_CAP) -> dict:
    """Fetch, extract main text, and ask the model for a one-shot summary.

    The prompt context is capped head-first at ``char_cap`` characters with a
    visible truncation mark; an empty extraction still issues the request
    with a ``Context: (empty)`` marker.
    """
    html = web.fetch_page(url)
    page = extract_main_text(html, url=url)
    text = page.text
    if not text:
        text = "(empty)"
    elif len(text) > char_cap:
        text = text[:char_cap] + "\n" + TRUNCATION_MARK
    prompt = templates.render("web_summarize", url=url, page_text=text)
    response = llm.complete_text(prompt, temperature=0.0, n=1)[0]
    return {"summary": extract_marked_answer(response), "source": url}
