"""Intent routing: a deterministic command grammar with an optional model fallback.

Grammar rules, tried in order, case-insensitive and tolerant of leading
whitespace (separators are a literal ``+`` with optional surrounding spaces,
and the ``+`` before a URL may be omitted):

1. ``arxiv + <topic>``                      -> ArxivSearch, topic = greedy remainder
2. ``web + summarize [+] <url>``            -> WebSummarize
3. ``web + give me the header[s] [+] <url>``-> WebHeaders

A web rule whose prefix matches but whose operand is not an absolute
http(s) URL (no other text around it) raises MalformedUrl. Anything else is
NoMatch, reported as None. Grammar parsing is pure: no I/O, no clock, no
randomness.

When the grammar says NoMatch, classify_intent may ask an LLM to pick one of
four closed-set labels; any failure or non-conforming output degrades to a
Comprehensive intent, so the router layer always produces an Intent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from urllib.parse import urlsplit

from .errors import BackendUnavailable, MalformedUrl, Timeout
from .gateway import LlmClient
from .prompts import TemplateLibrary, builtin_library
from .tracing import Trace


class IntentKind(str, Enum):
    ARXIV_SEARCH = "arxiv_search"
    WEB_SUMMARIZE = "web_summarize"
    WEB_HEADERS = "web_headers"
    COMPREHENSIVE = "comprehensive"


class IntentOrigin(str, Enum):
    GRAMMAR = "grammar"
    LLM_ROUTER = "llm_router"
    DEFAULT = "default"


@dataclass(frozen=True)
class RawQuery:
    """User input preserved byte-for-byte from the entry point."""

    text: str


@dataclass(frozen=True)
class Intent:
    kind: IntentKind
    origin: IntentOrigin
    topic: str | None = None
    url: str | None = None

    def __post_init__(self):
        if self.kind is IntentKind.ARXIV_SEARCH:
            if not self.topic or not self.topic.strip():
                raise ValueError("arxiv_search intent requires a non-empty topic")
            if self.url is not None:
                raise ValueError("arxiv_search intent must not carry a url")
        elif self.kind in (IntentKind.WEB_SUMMARIZE, IntentKind.WEB_HEADERS):
            if self.topic is not None:
                raise ValueError(f"{self.kind.value} intent must not carry a topic")
            if self.url is None or _check_absolute_url(self.url) is None:
                raise ValueError(f"{self.kind.value} intent requires an absolute http(s) url")
        else:
            if self.topic is not None or self.url is not None:
                raise ValueError("comprehensive intent carries neither topic nor url")


_ARXIV_RE = re.compile(r"^\s*arxiv\s*\+(?P<topic>.*)$", re.IGNORECASE | re.DOTALL)
_SUMMARIZE_RE = re.compile(
    r"^\s*web\s*\+\s*summarize(?=$|\s|\+)(?P<rest>.*)$", re.IGNORECASE | re.DOTALL)
_HEADERS_RE = re.compile(
    r"^\s*web\s*\+\s*give\s+me\s+the\s+headers?(?=$|\s|\+)(?P<rest>.*)$",
    re.IGNORECASE | re.DOTALL)


def _check_absolute_url(candidate: str) -> str | None:
    """The candidate itself when it is an absolute http(s) URL, else None."""
    if not candidate or any(ch.isspace() for ch in candidate):
        return None
    try:
        parts = urlsplit(candidate)
    except ValueError:
        return None
    if parts.scheme.lower() not in ("http", "https") or not parts.netloc:
        return None
    return candidate


def _web_operand_url(rest: str) -> str:
    """URL operand after a matched web rule; raises MalformedUrl otherwise."""
    operand = rest.strip()
    if operand.startswith("+"):
        operand = operand[1:].strip()
    url = _check_absolute_url(operand)
    if url is None:
        raise MalformedUrl(f"expected an absolute http(s) URL, got {operand!r}")
    return url


def forced_intent(kind: IntentKind, text: str) -> Intent:
    """Intent for an explicitly requested mode; the whole text is the operand.

    Web kinds require the text to be an absolute http(s) URL (MalformedUrl
    otherwise); the arxiv kind requires a non-blank topic (ValueError).
    Forced intents carry the default origin: nothing was inferred.
    """
    if kind is IntentKind.ARXIV_SEARCH:
        return Intent(kind, IntentOrigin.DEFAULT, topic=text)
    if kind in (IntentKind.WEB_SUMMARIZE, IntentKind.WEB_HEADERS):
        candidate = text.strip()
        if _check_absolute_url(candidate) is None:
            raise MalformedUrl(f"expected an absolute http(s) URL, got {candidate!r}")
        return Intent(kind, IntentOrigin.DEFAULT, url=candidate)
    return Intent(kind, IntentOrigin.DEFAULT)


def parse_command(raw: RawQuery) -> Intent | None:
    """Apply the command grammar; None means no rule matched."""
    match = _ARXIV_RE.match(raw.text)
    if match:
        topic = match.group("topic").strip()
        if not topic:
            return None
        return Intent(IntentKind.ARXIV_SEARCH, IntentOrigin.GRAMMAR, topic=topic)
    match = _SUMMARIZE_RE.match(raw.text)
    if match:
        return Intent(IntentKind.WEB_SUMMARIZE, IntentOrigin.GRAMMAR,
                      url=_web_operand_url(match.group("rest")))
    match = _HEADERS_RE.match(raw.text)
    if match:
        return Intent(IntentKind.WEB_HEADERS, IntentOrigin.GRAMMAR,
                      url=_web_operand_url(match.group("rest")))
    return None


_ROUTER_LABELS = ("ARXIV", "WEB_SUMMARIZE", "WEB_HEADERS", "COMPREHENSIVE")


def _first_label_token(text: str) -> str | None:
    for token in text.split():
        if token in _ROUTER_LABELS:
            return token
    return None


def _first_url_token(text: str) -> str | None:
    for token in text.split():
        if _check_absolute_url(token):
            return token
    return None


def classify_intent(raw: RawQuery, llm: LlmClient | None, enabled: bool,
                    library: TemplateLibrary | None = None,
                    trace: Trace | None = None) -> Intent:
    """Closed-set LLM fallback for inputs the grammar did not match.

    Returns an Intent always: disabled routing, a failed LLM call, output
    without an exactly-matching label token, or a web label with no URL in
    the query all degrade to Comprehensive with origin recorded accordingly.
    """
    default = Intent(IntentKind.COMPREHENSIVE, IntentOrigin.DEFAULT)
    if not enabled or llm is None:
        return default
    library = library or builtin_library()
    prompt = library.render("intent_router", question=raw.text)
    try:
        text = llm.complete_text(prompt, temperature=0.0, n=1)[0]
    except (BackendUnavailable, Timeout) as exc:
        if trace is not None:
            trace.add("classify_intent", note=f"degraded to default: {exc.kind}")
        return default
    label = _first_label_token(text)
    if label == "ARXIV" and raw.text.strip():
        return Intent(IntentKind.ARXIV_SEARCH, IntentOrigin.LLM_ROUTER, topic=raw.text)
    if label in ("WEB_SUMMARIZE", "WEB_HEADERS"):
        url = _first_url_token(raw.text)
        if url is not None:
            kind = IntentKind.WEB_SUMMARIZE if label == "WEB_SUMMARIZE" else IntentKind.WEB_HEADERS
            return Intent(kind, IntentOrigin.LLM_ROUTER, url=url)
        if trace is not None:
            trace.add("classify_intent", note=f"label {label} unusable without a url")
        return default
    if label == "COMPREHENSIVE":
        return Intent(IntentKind.COMPREHENSIVE, IntentOrigin.LLM_ROUTER)
    return default


def route_query(raw: RawQuery, llm: LlmClient | None = None, enabled: bool = False,
                library: TemplateLibrary | None = None,
                trace: Trace | None = None) -> Intent:
    """Grammar first, then the fallback classifier. Always yields an Intent."""
    intent = parse_command(raw)
    if intent is not None:
        return intent
    return classify_intent(raw, llm, enabled, library=library, trace=trace)
