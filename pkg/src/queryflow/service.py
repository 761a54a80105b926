"""HTTP JSON facade.

Response contract for POST /v1/query: a top-level envelope
``{"intent", "origin", "cache_hit", "answer", "trace"}`` whose ``answer``
payload depends on the intent kind:

* ``arxiv_search``   -> ``{"entries": [...]}``
* ``web_summarize``  -> ``{"summary": ..., "source": ...}``
* ``web_headers``    -> ``{"outline": [...]}`` (nested heading nodes)
* ``comprehensive``  -> ``{"model_only", "search_only", "hybrid"}``

Failures use one error shape, ``{"error": {"kind", "message", "step"}}``,
with the status chosen by failure class: 400 for bad requests (schema
violations, empty queries, malformed URLs), 504 for timeouts, 502 for
everything upstream (unreachable backends, quota, oversized or non-HTML
pages, store corruption). Credentials never appear in config, logs or
responses; live backends read them from the environment at call time.
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from .config import ServiceConfig
from .errors import QueryflowError
from .pipeline import ToolAnswer, TriChannelAnswer
from .router import Intent, IntentKind
from .runtime import Runtime, build_runtime, default_options, run_query

_BAD_REQUEST_KINDS = frozenset({"malformed_url"})


def status_for_error(exc: QueryflowError) -> int:
    if exc.kind in _BAD_REQUEST_KINDS:
        return 400
    if exc.kind == "timeout":
        return 504
    return 502


def error_body(kind: str, message: str, step: str | None) -> dict:
    return {"error": {"kind": kind, "message": message, "step": step}}


class QueryOptionsBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    use_cache: bool | None = None
    self_consistency_n: int | None = Field(default=None, ge=1, le=10)
    k_search: int | None = Field(default=None, ge=1, le=10)
    n_variants: int | None = Field(default=None, ge=0, le=10)


class QueryBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    query: str
    mode: Literal["auto", "arxiv", "web_summarize", "web_headers",
                  "comprehensive"] = "auto"
    options: QueryOptionsBody = Field(default_factory=QueryOptionsBody)


def answer_payload(intent: Intent, result: ToolAnswer | TriChannelAnswer) -> dict:
    if isinstance(result, TriChannelAnswer):
        return {
            "model_only": result.model_only,
            "search_only": result.search_only.to_dict(),
            "hybrid": result.hybrid.to_dict(),
        }
    if intent.kind is IntentKind.ARXIV_SEARCH:
        return {"entries": [entry.to_dict() for entry in result.payload]}
    if intent.kind is IntentKind.WEB_HEADERS:
        return {"outline": result.payload.to_json_list()}
    return dict(result.payload)


def query_envelope(intent: Intent, result: ToolAnswer | TriChannelAnswer) -> dict:
    cache_hit = result.cache_hit if isinstance(result, TriChannelAnswer) else False
    return {
        "intent": intent.kind.value,
        "origin": intent.origin.value,
        "cache_hit": cache_hit,
        "answer": answer_payload(intent, result),
        "trace": result.trace.to_list(),
    }


def create_app(config: ServiceConfig | None = None,
               runtime: Runtime | None = None) -> FastAPI:
    if runtime is None:
        runtime = build_runtime(config)
    config = runtime.config

    app = FastAPI(title="queryflow", version="0.1.0", docs_url=None, redoc_url=None)
    app.state.runtime = runtime
    app.add_middleware(
        CORSMiddleware, allow_origins=list(config.cors_origins),
        allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def _on_validation_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(part) for part in first.get("loc", ()))
        message = f"{where}: {first.get('msg', 'invalid request')}" if where else "invalid request"
        return JSONResponse(status_code=400,
                            content=error_body("validation_error", message, "request"))

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/v1/query")
    def query(body: QueryBody):
        options = default_options(
            config,
            use_cache=body.options.use_cache,
            self_consistency_n=body.options.self_consistency_n,
            k_search=body.options.k_search,
            n_variants=body.options.n_variants)
        try:
            intent, result = run_query(app.state.runtime, body.query,
                                       mode=body.mode, options=options)
        except QueryflowError as exc:
            return JSONResponse(status_code=status_for_error(exc),
                                content=error_body(exc.kind, exc.message, exc.step))
        except ValueError as exc:
            return JSONResponse(status_code=400,
                                content=error_body("invalid_request", str(exc), None))
        return query_envelope(intent, result)

    @app.post("/v1/cache/clear")
    def cache_clear() -> dict:
        return {"cleared": app.state.runtime.cache.clear()}

    return app
