"""Service configuration.

Every knob lives here; credentials never do. API keys and base URLs are
read from the environment by the live backends at call time (LLM_API_KEY,
LLM_API_BASE, LLM_MODEL, SEARCH_API_KEY, SEARCH_API_BASE, ARXIV_API_BASE),
so a config file on disk can never leak a secret.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

BACKEND_NAMES = ("llm", "search", "arxiv", "web")
BACKEND_MODES = ("mock", "live")
FIXTURE_KINDS = ("llm", "search", "arxiv", "pages")

_CONFIG_KEYS = {
    "port", "backend_mode", "fixture_dirs", "cache_dir", "mirror_dir",
    "templates_dir", "similarity_threshold", "k_search", "self_consistency_n",
    "link_count", "n_variants", "router_llm_fallback", "llm_timeout_s",
    "http_timeout_s", "page_size_cap_bytes", "summary_char_cap",
    "digest_char_cap", "cors_origins",
}


def _default_cache_dir() -> str:
    env = os.environ.get("CACHE_DIR")
    if env:
        return env
    return str(Path.home() / ".queryflow" / "cache")


def _expand_backend_mode(value: str | dict[str, str]) -> dict[str, str]:
    if isinstance(value, str):
        value = {name: value for name in BACKEND_NAMES}
    if not isinstance(value, dict):
        raise ValueError("backend_mode must be a mode string or a per-backend mapping")
    unknown = set(value) - set(BACKEND_NAMES)
    if unknown:
        raise ValueError(f"unknown backend names in backend_mode: {sorted(unknown)}")
    expanded = {name: "mock" for name in BACKEND_NAMES}
    expanded.update(value)
    for name, mode in expanded.items():
        if mode not in BACKEND_MODES:
            raise ValueError(f"backend_mode[{name!r}] must be one of {BACKEND_MODES}, got {mode!r}")
    return expanded


@dataclass(frozen=True)
class ServiceConfig:
    port: int = 8000
    backend_mode: dict[str, str] = field(
        default_factory=lambda: {name: "mock" for name in BACKEND_NAMES})
    fixture_dirs: dict[str, str] = field(default_factory=dict)
    cache_dir: str = field(default_factory=_default_cache_dir)
    mirror_dir: str | None = None
    templates_dir: str | None = None
    similarity_threshold: float = 0.75
    k_search: int = 5
    self_consistency_n: int = 1
    link_count: int = 3
    n_variants: int = 2
    router_llm_fallback: bool = False
    llm_timeout_s: float = 30.0
    http_timeout_s: float = 10.0
    page_size_cap_bytes: int = 5 * 1024 * 1024
    summary_char_cap: int = 12000
    digest_char_cap: int = 4000
    cors_origins: list[str] = field(default_factory=lambda: ["*"])

    def __post_init__(self):
        object.__setattr__(self, "backend_mode", _expand_backend_mode(self.backend_mode))
        unknown = set(self.fixture_dirs) - set(FIXTURE_KINDS)
        if unknown:
            raise ValueError(f"unknown fixture_dirs keys: {sorted(unknown)}")
        if not (1 <= self.port <= 65535):
            raise ValueError("port must be in 1..65535")
        if not 0.0 < self.similarity_threshold <= 1.0:
            raise ValueError("similarity_threshold must be in (0, 1]")
        if not 1 <= self.k_search <= 10:
            raise ValueError("k_search must be in 1..10")
        if not 1 <= self.self_consistency_n <= 10:
            raise ValueError("self_consistency_n must be in 1..10")
        if self.link_count < 1:
            raise ValueError("link_count must be >= 1")
        if self.n_variants < 0:
            raise ValueError("n_variants must be >= 0")
        for name in ("llm_timeout_s", "http_timeout_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("page_size_cap_bytes", "summary_char_cap", "digest_char_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def fixture_dir(self, kind: str) -> Path | None:
        value = self.fixture_dirs.get(kind)
        return Path(value) if value else None

    def with_overrides(self, **kwargs) -> "ServiceConfig":
        return replace(self, **kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        """Strict JSON config: unknown keys are rejected, not ignored."""
        try:
            raw = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ValueError(f"cannot read config file {path}: {exc}") from exc
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ValueError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError("config root must be a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)
