"""Process wiring: turn a ServiceConfig into live, ready-to-call components.

Everything downstream (service routes, CLI commands, benchmarks) talks to a
Runtime instead of constructing clients by hand, so all of them share one
call counter, one cache store and one template library per process.

Mock backends never touch the network. A mock backend without a configured
fixture directory still works: it resolves against ``<cache_dir>/fixtures/
<kind>``, and missing fixture files surface as the same backend errors a
dead live endpoint would produce.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .cache import CacheStore
from .config import ServiceConfig
from .gateway import CallCounter, HttpLlmBackend, LlmClient, LlmGateway, MockLlmBackend
from .pipeline import PipelineDeps, QueryOptions, ToolAnswer, TriChannelAnswer, execute
from .prompts import TemplateLibrary, builtin_library
from .router import Intent, IntentKind, RawQuery, forced_intent, route_query
from .tools.arxiv import ArxivClient
from .tools.search import SearchClient
from .tools.webpage import WebClient

MODE_TO_KIND = {
    "arxiv": IntentKind.ARXIV_SEARCH,
    "web_summarize": IntentKind.WEB_SUMMARIZE,
    "web_headers": IntentKind.WEB_HEADERS,
    "comprehensive": IntentKind.COMPREHENSIVE,
}
QUERY_MODES = ("auto",) + tuple(MODE_TO_KIND)


@dataclass
class Runtime:
    config: ServiceConfig
    counter: CallCounter
    gateway: LlmGateway
    llm: LlmClient
    arxiv: ArxivClient
    web: WebClient
    search: SearchClient
    cache: CacheStore
    templates: TemplateLibrary
    deps: PipelineDeps


def _tool_mode(config_mode: str) -> str:
    return "fixture" if config_mode == "mock" else "live"


def _fixture_dir(config: ServiceConfig, kind: str) -> Path:
    configured = config.fixture_dir(kind)
    if configured is not None:
        return configured
    return Path(config.cache_dir) / "fixtures" / kind


def build_runtime(config: ServiceConfig | None = None) -> Runtime:
    config = config or ServiceConfig()
    counter = CallCounter()

    gateway = LlmGateway(counter, timeout_s=config.llm_timeout_s)
    gateway.register("mock", MockLlmBackend.from_dir(_fixture_dir(config, "llm")))
    gateway.register("live", HttpLlmBackend())
    llm = LlmClient(gateway, backend_id=config.backend_mode["llm"])

    arxiv = ArxivClient(
        _tool_mode(config.backend_mode["arxiv"]),
        fixture_dir=_fixture_dir(config, "arxiv"),
        counter=counter, timeout_s=config.http_timeout_s)
    web = WebClient(
        _tool_mode(config.backend_mode["web"]),
        fixture_dir=_fixture_dir(config, "pages"),
        counter=counter, timeout_s=config.http_timeout_s,
        max_bytes=config.page_size_cap_bytes)
    search = SearchClient(
        _tool_mode(config.backend_mode["search"]),
        fixture_dir=_fixture_dir(config, "search"),
        counter=counter, timeout_s=config.http_timeout_s)

    cache = CacheStore(Path(config.cache_dir), threshold=config.similarity_threshold)
    if config.templates_dir:
        templates = builtin_library().with_overrides(
            TemplateLibrary.from_dir(Path(config.templates_dir)))
    else:
        templates = builtin_library()

    deps = PipelineDeps(
        llm=llm, arxiv=arxiv, web=web, search=search, cache=cache,
        templates=templates, counter=counter, link_count=config.link_count,
        summary_char_cap=config.summary_char_cap,
        digest_char_cap=config.digest_char_cap)
    return Runtime(config=config, counter=counter, gateway=gateway, llm=llm,
                   arxiv=arxiv, web=web, search=search, cache=cache,
                   templates=templates, deps=deps)


def default_options(config: ServiceConfig, *, use_cache: bool | None = None,
                    self_consistency_n: int | None = None,
                    k_search: int | None = None,
                    n_variants: int | None = None) -> QueryOptions:
    """Request options merged over the configured defaults."""
    return QueryOptions(
        use_cache=use_cache if use_cache is not None else True,
        self_consistency_n=(self_consistency_n if self_consistency_n is not None
                            else config.self_consistency_n),
        k_search=k_search if k_search is not None else config.k_search,
        n_variants=n_variants if n_variants is not None else config.n_variants)


def run_query(runtime: Runtime, text: str, mode: str = "auto",
              options: QueryOptions | None = None
              ) -> tuple[Intent, ToolAnswer | TriChannelAnswer]:
    """Route (or force) an intent for the text and execute it."""
    if not text or not text.strip():
        raise ValueError("query must be non-empty")
    if mode not in QUERY_MODES:
        raise ValueError(f"mode must be one of {QUERY_MODES}, got {mode!r}")
    if options is None:
        options = default_options(runtime.config)
    if mode == "auto":
        enabled = runtime.config.router_llm_fallback
        intent = route_query(RawQuery(text), llm=runtime.llm if enabled else None,
                             enabled=enabled, library=runtime.templates)
    else:
        intent = forced_intent(MODE_TO_KIND[mode], text)
    result = execute(intent, runtime.deps, options, query=text)
    return intent, result
