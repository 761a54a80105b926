"""Tool adapters: arXiv search, page fetching/outlining, web search."""

from .arxiv import ArxivClient, ArxivEntry, entries_to_json, parse_atom_feed
from .search import SearchClient, SearchResult
from .webpage import (
    HeadingNode,
    HeadingTree,
    PageText,
    WebClient,
    extract_headings,
    extract_main_text,
    fetch_page,
    summarize_page,
)

__all__ = [
    "ArxivClient",
    "ArxivEntry",
    "HeadingNode",
    "HeadingTree",
    "PageText",
    "SearchClient",
    "SearchResult",
    "WebClient",
    "entries_to_json",
    "extract_headings",
    "extract_main_text",
    "fetch_page",
    "parse_atom_feed",
    "summarize_page",
]
