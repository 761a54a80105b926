"""End-to-end execution of routed intents.

Tool intents dispatch straight to their tool. Comprehensive queries produce a
three-channel answer: the model's own chain-of-thought answer, a search-only
channel (fused multi-query retrieval plus an LLM digest of the snippets), and
a hybrid synthesis of both with supporting links.

The comprehensive path consults the cache first; a hit rebuilds the answer
solely from the stored entry, with zero LLM or search calls, which is the
whole latency point. A cold run stores its hybrid summary (the synthesis
call doubles as the key-information distillation) together with its links,
so the warm answer reproduces the cold hybrid channel byte-for-byte. Search
failures degrade the answer instead of failing it: the search channel
carries the error note and the hybrid channel falls back to the model-only
text. Model (LLM) failures propagate. The model and search branches are
independent; they run in submission order so per-step trace accounting stays
exact.

A run with identical mock fixtures reproduces identical output bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cache import CacheStore, RetrievedDoc, multi_query_retrieve
from .errors import QueryflowError
from .gateway import CallCounter, LlmClient
from .prompts import (
    PromptMode,
    ReasoningChain,
    TemplateLibrary,
    build_cot_prompt,
    extract_marked_answer,
    self_consistent_answer,
)
from .router import Intent, IntentKind
from .tools.arxiv import ArxivClient
from .tools.search import SearchClient
from .tools.webpage import WebClient, extract_headings, summarize_page
from .tracing import Trace

SELF_CONSISTENCY_MAX = 10
SELF_CONSISTENCY_TEMPERATURE = 0.7
DIGEST_CHAR_CAP = 4000
TRUNCATION_MARK = "[truncated]"


@dataclass(frozen=True)
class QueryOptions:
    use_cache: bool = True
    self_consistency_n: int = 1
    k_search: int = 5
    n_variants: int = 2

    def __post_init__(self):
        if not 1 <= self.self_consistency_n <= SELF_CONSISTENCY_MAX:
            raise ValueError(f"self_consistency_n must be within 1..{SELF_CONSISTENCY_MAX}")
        if not 1 <= self.k_search <= 10:
            raise ValueError("k_search must be within 1..10")
        if self.n_variants < 0:
            raise ValueError("n_variants must be >= 0")


@dataclass
class PipelineDeps:
    """Everything execute() needs, wired once per process."""

    llm: LlmClient
    arxiv: ArxivClient
    web: WebClient
    search: SearchClient
    cache: CacheStore
    templates: TemplateLibrary
    counter: CallCounter | None = None
    link_count: int = 3
    similarity_threshold: float | None = None
    arxiv_max_results: int = 10
    summary_char_cap: int = 12000
    digest_char_cap: int = DIGEST_CHAR_CAP


@dataclass
class ToolAnswer:
    kind: IntentKind
    payload: object
    trace: Trace

    def to_dict(self) -> dict:
        if self.kind is IntentKind.ARXIV_SEARCH:
            payload = [entry.to_dict() for entry in self.payload]
        elif self.kind is IntentKind.WEB_HEADERS:
            payload = self.payload.to_json_list()
        else:
            payload = self.payload
        return {"kind": self.kind.value, "payload": payload, "trace": self.trace.to_list()}


@dataclass
class SearchChannel:
    results: list[RetrievedDoc] = field(default_factory=list)
    digest: str = ""

    def to_dict(self) -> dict:
        return {
            "results": [
                {"rank": i, "title": doc.title, "url": doc.url, "snippet": doc.snippet}
                for i, doc in enumerate(self.results, 1)
            ],
            "digest": self.digest,
        }


@dataclass
class HybridChannel:
    summary: str = ""
    links: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"summary": self.summary, "links": list(self.links)}


@dataclass
class TriChannelAnswer:
    model_only: str
    search_only: SearchChannel
    hybrid: HybridChannel
    cache_hit: bool
    trace: Trace

    def to_dict(self) -> dict:
        return {
            "model_only": self.model_only,
            "search_only": self.search_only.to_dict(),
            "hybrid": self.hybrid.to_dict(),
            "cache_hit": self.cache_hit,
            "trace": self.trace.to_list(),
        }


def format_snippets(docs: list[RetrievedDoc], cap: int = DIGEST_CHAR_CAP) -> str:
    """Numbered snippet block for digest/synthesis prompts, capped head-first."""
    lines = [f"[{i}] {doc.title or doc.url}: {doc.snippet}".strip()
             for i, doc in enumerate(docs, 1)]
    block = "\n".join(lines)
    if len(block) > cap:
        block = block[:cap] + "\n" + TRUNCATION_MARK
    return block or "(no results)"


def _model_answer(query: str, deps: PipelineDeps, options: QueryOptions) -> str:
    """CoT answer, self-consistency voted when more than one sample is asked."""
    prompt = build_cot_prompt(query, None, PromptMode.ZERO_SHOT_COT, deps.templates)
    n = options.self_consistency_n
    temperature = 0.0 if n == 1 else SELF_CONSISTENCY_TEMPERATURE
    texts = deps.llm.complete_text(prompt, temperature=temperature, n=n)
    chains = [ReasoningChain.from_completion("qa_zero_shot_cot", text) for text in texts]
    winner, _votes = self_consistent_answer(chains)
    return winner


def comprehensive_query(query: str, deps: PipelineDeps,
                        options: QueryOptions = QueryOptions()) -> TriChannelAnswer:
    if not query or not query.strip():
        raise ValueError("query must be non-empty")
    trace = Trace()

    if options.use_cache:
        with trace.step("cache_lookup", deps.counter):
            entry = deps.cache.lookup(query, deps.similarity_threshold)
        if entry is not None:
            return TriChannelAnswer(
                model_only="",
                search_only=SearchChannel(),
                hybrid=HybridChannel(summary=entry.key_info, links=list(entry.sources)),
                cache_hit=True,
                trace=trace,
            )

    with trace.step("model_answer", deps.counter):
        model_only = _model_answer(query, deps, options)

    docs: list[RetrievedDoc] = []
    search_note: str | None = None
    with trace.step("retrieve", deps.counter) as record:
        try:
            docs = multi_query_retrieve(
                query, deps.llm, deps.search, deps.templates,
                n_variants=options.n_variants, k=options.k_search, trace=trace)
        except QueryflowError as exc:
            search_note = f"search unavailable: {exc.message}"
            record.note = "degraded: all searches failed"

    if docs:
        snippets = format_snippets(docs, deps.digest_char_cap)
        with trace.step("digest", deps.counter):
            digest_raw = deps.llm.complete_text(
                deps.templates.render("search_digest", snippets=snippets))[0]
        digest = extract_marked_answer(digest_raw)
        with trace.step("synthesize", deps.counter):
            summary_raw = deps.llm.complete_text(
                deps.templates.render("hybrid_synthesis",
                                      model_answer=model_only, snippets=snippets))[0]
        summary = extract_marked_answer(summary_raw)
        links = [doc.url for doc in docs[:min(deps.link_count, len(docs))]]
        search_channel = SearchChannel(results=docs, digest=digest)
        hybrid = HybridChannel(summary=summary, links=links)
    else:
        # degraded or genuinely empty search: hybrid falls back to the model text
        if search_note is not None:
            trace.add("synthesize", note="degraded: hybrid falls back to model_only")
        search_channel = SearchChannel(results=[], digest=search_note or "")
        hybrid = HybridChannel(summary=model_only, links=[])

    if options.use_cache and hybrid.summary.strip():
        with trace.step("cache_store", deps.counter):
            deps.cache.store(query, key_info=hybrid.summary, sources=hybrid.links,
                             fingerprint=f"{deps.llm.backend_id}|hybrid_synthesis")

    return TriChannelAnswer(
        model_only=model_only,
        search_only=search_channel,
        hybrid=hybrid,
        cache_hit=False,
        trace=trace,
    )


def execute(intent: Intent, deps: PipelineDeps,
            options: QueryOptions = QueryOptions(), *,
            query: str | None = None) -> ToolAnswer | TriChannelAnswer:
    """Dispatch an intent. Comprehensive intents need the raw query text.

    Errors raised by the underlying operation propagate with the failing
    step's name stamped on them; the trace always reflects the executed path.
    """
    if intent.kind is IntentKind.ARXIV_SEARCH:
        trace = Trace()
        with trace.step("arxiv_search", deps.counter):
            entries = deps.arxiv.search(intent.topic, deps.arxiv_max_results)
        return ToolAnswer(IntentKind.ARXIV_SEARCH, entries, trace)
    if intent.kind is IntentKind.WEB_SUMMARIZE:
        trace = Trace()
        with trace.step("summarize_page", deps.counter):
            record = summarize_page(intent.url, deps.llm, deps.web, deps.templates,
                                    char_cap=deps.summary_char_cap)
        return ToolAnswer(IntentKind.WEB_SUMMARIZE, record, trace)
    if intent.kind is IntentKind.WEB_HEADERS:
        trace = Trace()
        with trace.step("fetch_page", deps.counter):
            html = deps.web.fetch_page(intent.url)
        with trace.step("extract_headings", deps.counter):
            tree = extract_headings(html)
        return ToolAnswer(IntentKind.WEB_HEADERS, tree, trace)
    if query is None:
        raise ValueError("comprehensive execution requires the raw query text")
    return comprehensive_query(query, deps, options)
