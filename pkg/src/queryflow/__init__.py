"""Retrieval-augmented question answering with routed tool intents.

A deterministic command grammar (with an optional model fallback) routes
each query to an arXiv search, a page summary, a heading outline, or the
comprehensive pipeline: a chain-of-thought answer, fused multi-query web
retrieval, and a cached hybrid synthesis of both.
"""

from .cache import (
    CacheEntry,
    CacheStore,
    LocalDirMirror,
    RetrievedDoc,
    fuse_rankings,
    multi_query_retrieve,
    parse_query_variants,
    similarity,
)
from .config import ServiceConfig
from .errors import (
    BackendUnavailable,
    DatasetParseError,
    DuplicateId,
    EmptyChains,
    HttpError,
    MalformedUrl,
    MirrorUnavailable,
    NotHtml,
    QueryflowError,
    QuotaExceeded,
    StoreCorrupt,
    StoreIoFailure,
    Timeout,
    TooLarge,
    UnknownBackend,
)
from .evaluation import (
    MetricReport,
    QAExample,
    average_precision,
    best_token_f1,
    exact_match,
    load_dataset,
    run_benchmark,
    token_f1,
)
from .gateway import (
    CallCounter,
    HttpLlmBackend,
    LlmClient,
    LlmGateway,
    LlmRequest,
    LlmResponse,
    MockLlmBackend,
    fixture_key,
    prompt_hash,
)
from .pipeline import (
    PipelineDeps,
    QueryOptions,
    ToolAnswer,
    TriChannelAnswer,
    comprehensive_query,
    execute,
)
from .prompts import (
    PromptMode,
    PromptTemplate,
    ReasoningChain,
    TemplateLibrary,
    build_cot_prompt,
    builtin_library,
    extract_final_answer,
    normalize_answer,
    self_consistent_answer,
)
from .router import (
    Intent,
    IntentKind,
    IntentOrigin,
    RawQuery,
    classify_intent,
    forced_intent,
    parse_command,
    route_query,
)
from .runtime import Runtime, build_runtime, default_options, run_query
from .tools import (
    ArxivClient,
    ArxivEntry,
    HeadingNode,
    HeadingTree,
    SearchClient,
    SearchResult,
    WebClient,
    extract_headings,
    extract_main_text,
    summarize_page,
)
from .tracing import StepRecord, Trace

__version__ = "0.1.0"

__all__ = [
    "ArxivClient", "ArxivEntry", "BackendUnavailable", "CacheEntry", "CacheStore",
    "CallCounter", "DatasetParseError", "DuplicateId", "EmptyChains", "HeadingNode",
    "HeadingTree", "HttpError", "HttpLlmBackend", "Intent", "IntentKind",
    "IntentOrigin", "LlmClient", "LlmGateway", "LlmRequest", "LlmResponse",
    "LocalDirMirror", "MalformedUrl", "MetricReport", "MirrorUnavailable",
    "MockLlmBackend", "NotHtml", "PipelineDeps", "PromptMode", "PromptTemplate",
    "QAExample", "QueryOptions", "QueryflowError", "QuotaExceeded", "RawQuery",
    "ReasoningChain", "RetrievedDoc", "Runtime", "SearchClient", "SearchResult",
    "ServiceConfig", "StepRecord", "StoreCorrupt", "StoreIoFailure",
    "TemplateLibrary", "Timeout", "ToolAnswer", "TooLarge", "Trace",
    "TriChannelAnswer", "UnknownBackend", "WebClient", "average_precision",
    "best_token_f1", "build_cot_prompt", "builtin_library", "classify_intent",
    "comprehensive_query", "exact_match", "execute", "extract_final_answer",
    "extract_headings", "extract_main_text", "fixture_key", "forced_intent",
    "fuse_rankings", "load_dataset", "multi_query_retrieve", "normalize_answer",
    "parse_command", "parse_query_variants", "prompt_hash", "route_query",
    "run_benchmark", "run_query", "self_consistent_answer", "similarity",
    "summarize_page", "token_f1", "__version__",
]
