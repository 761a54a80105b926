"""Shared harness: an offline runtime whose mock backends are scripted per test."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import pytest

from queryflow import (
    MockLlmBackend,
    PromptMode,
    Runtime,
    ServiceConfig,
    build_cot_prompt,
    build_runtime,
)
from queryflow.pipeline import format_snippets
from queryflow.util import slugify, url_slug

DATA_DIR = Path(__file__).parent / "data"


@dataclass
class Harness:
    """One isolated runtime plus helpers to script its mock backends."""

    runtime: Runtime
    mock: MockLlmBackend
    fixture_dirs: dict[str, Path]
    scripts: dict[str, list[str]] = field(default_factory=dict)

    @property
    def config(self) -> ServiceConfig:
        return self.runtime.config

    def _script(self, template_id: str, prompt: str, responses: list[str]) -> str:
        key = self.mock.script(template_id, prompt, responses)
        self.scripts[key] = list(responses)
        return key

    def persist_llm_scripts(self) -> Path:
        """Write every scripted response as a mock fixture file on disk,
        so a runtime built in another process (e.g. the CLI) replays them."""
        path = self.fixture_dirs["llm"] / "scripted.jsonl"
        lines = [json.dumps({"key": key, "responses": responses})
                 for key, responses in self.scripts.items()]
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return path

    def script_cot(self, question: str, responses: list[str]) -> str:
        prompt = build_cot_prompt(question, None, PromptMode.ZERO_SHOT_COT,
                                  self.runtime.templates)
        return self._script("qa_zero_shot_cot", prompt, responses)

    def script_multi_query(self, question: str, n: int, responses: list[str]) -> str:
        prompt = self.runtime.templates.render("multi_query", question=question, n=str(n))
        return self._script("multi_query", prompt, responses)

    def script_digest(self, snippets: str, responses: list[str]) -> str:
        prompt = self.runtime.templates.render("search_digest", snippets=snippets)
        return self._script("search_digest", prompt, responses)

    def script_synthesis(self, model_answer: str, snippets: str,
                         responses: list[str]) -> str:
        prompt = self.runtime.templates.render(
            "hybrid_synthesis", model_answer=model_answer, snippets=snippets)
        return self._script("hybrid_synthesis", prompt, responses)

    def script_router(self, question: str, responses: list[str]) -> str:
        prompt = self.runtime.templates.render("intent_router", question=question)
        return self._script("intent_router", prompt, responses)

    def script_web_summary(self, url: str, page_text: str, responses: list[str]) -> str:
        prompt = self.runtime.templates.render("web_summarize", url=url,
                                               page_text=page_text)
        return self._script("web_summarize", prompt, responses)

    def add_search_fixture(self, query: str, rows: list[dict]) -> Path:
        path = self.fixture_dirs["search"] / (slugify(query) + ".json")
        path.write_text(json.dumps(rows), encoding="utf-8")
        return path

    def add_arxiv_fixture(self, topic: str, xml: str) -> Path:
        path = self.fixture_dirs["arxiv"] / (slugify(topic) + ".xml")
        path.write_text(xml, encoding="utf-8")
        return path

    def add_page_fixture(self, url: str, html: str) -> Path:
        path = self.fixture_dirs["pages"] / (url_slug(url) + ".html")
        path.write_text(html, encoding="utf-8")
        return path

    def script_simple_comprehensive(self, question: str, answer: str,
                                    url: str = "https://example.com/doc",
                                    snippet: str = "a snippet") -> None:
        """Script a one-result cold run: CoT, one search hit, digest, synthesis.

        Uses n_variants=0 semantics: only the original query is searched.
        The synthesized hybrid answer equals ``answer``.
        """
        self.script_cot(question, [f"Reasoning.\nAnswer: {answer}"])
        rows = [{"title": "Doc", "url": url, "snippet": snippet}]
        self.add_search_fixture(question, rows)
        docs = self.expected_docs([rows])
        snippets = format_snippets(docs, self.config.digest_char_cap)
        self.script_digest(snippets, ["Answer: digest of findings"])
        self.script_synthesis(answer, snippets, [f"Answer: {answer}"])

    @staticmethod
    def expected_docs(row_lists: list[list[dict]], k: int = 5):
        """Fused docs a search over these fixture rows must produce."""
        from queryflow import SearchResult, fuse_rankings

        result_lists = [
            [SearchResult(rank=i, title=row.get("title", ""), url=row["url"],
                          snippet=row.get("snippet", ""))
             for i, row in enumerate(rows, 1)]
            for rows in row_lists
        ]
        return fuse_rankings(result_lists, k)


def make_harness(tmp_path: Path, **overrides) -> Harness:
    fixture_dirs = {kind: tmp_path / f"fixtures-{kind}"
                    for kind in ("llm", "search", "arxiv", "pages")}
    for directory in fixture_dirs.values():
        directory.mkdir(parents=True, exist_ok=True)
    config = ServiceConfig(
        cache_dir=str(tmp_path / "cache"),
        fixture_dirs={kind: str(path) for kind, path in fixture_dirs.items()},
        **overrides,
    )
    runtime = build_runtime(config)
    mock = runtime.gateway.backend("mock")
    return Harness(runtime=runtime, mock=mock, fixture_dirs=fixture_dirs)


@pytest.fixture
def harness(tmp_path) -> Harness:
    return make_harness(tmp_path)


@pytest.fixture
def make(tmp_path):
    """Factory for harnesses with config overrides (e.g. n_variants=0)."""
    counter = {"n": 0}

    def _make(**overrides) -> Harness:
        counter["n"] += 1
        root = tmp_path / f"h{counter['n']}"
        root.mkdir()
        return make_harness(root, **overrides)

    return _make
