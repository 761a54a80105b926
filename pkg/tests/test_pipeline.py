"""Intent execution: tool dispatch and the three-channel comprehensive path."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from queryflow.cache import RetrievedDoc
from queryflow.errors import BackendUnavailable, HttpError
from queryflow.pipeline import (
    QueryOptions,
    SearchChannel,
    ToolAnswer,
    TriChannelAnswer,
    comprehensive_query,
    execute,
    format_snippets,
)
from queryflow.router import IntentKind, forced_intent

DATA_DIR = Path(__file__).parent / "data"
NO_VARIANTS = QueryOptions(n_variants=0)


class TestQueryOptions:
    def test_defaults(self):
        options = QueryOptions()
        assert options.use_cache is True
        assert options.self_consistency_n == 1
        assert options.k_search == 5
        assert options.n_variants == 2

    @pytest.mark.parametrize("kwargs", [
        {"self_consistency_n": 0},
        {"self_consistency_n": 11},
        {"k_search": 0},
        {"k_search": 11},
        {"n_variants": -1},
    ])
    def test_out_of_range_rejected(self, kwargs):
        with pytest.raises(ValueError):
            QueryOptions(**kwargs)


def doc(url, title="", snippet="", score=1.0):
    return RetrievedDoc(url=url, snippet=snippet, score=score,
                        provenance="search", title=title)


class TestFormatSnippets:
    def test_numbered_lines_with_titles(self):
        docs = [doc("https://e.com/a", title="Alpha", snippet="first"),
                doc("https://e.com/b", title="Beta", snippet="second")]
        assert format_snippets(docs) == ("[1] Alpha: first\n[2] Beta: second")

    def test_url_fallback_when_title_missing(self):
        assert format_snippets([doc("https://e.com/a", snippet="s")]) == \
            "[1] https://e.com/a: s"

    def test_cap_appends_truncation_mark(self):
        docs = [doc("https://e.com/a", title="T", snippet="x" * 100)]
        block = format_snippets(docs, cap=20)
        assert block.endswith("\n[truncated]")
        assert len(block) == 20 + len("\n[truncated]")

    def test_empty_docs(self):
        assert format_snippets([]) == "(no results)"


class TestComprehensiveCold:
    QUESTION = "What is the capital of Australia?"

    def test_three_channels_filled(self, harness):
        harness.script_simple_comprehensive(self.QUESTION, "Canberra",
                                            url="https://e.com/au")
        answer = comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        assert isinstance(answer, TriChannelAnswer)
        assert answer.model_only == "Canberra"
        assert answer.search_only.digest == "digest of findings"
        assert [d.url for d in answer.search_only.results] == ["https://e.com/au"]
        assert answer.hybrid.summary == "Canberra"
        assert answer.hybrid.links == ["https://e.com/au"]
        assert answer.cache_hit is False

    def test_trace_steps_in_order(self, harness):
        harness.script_simple_comprehensive(self.QUESTION, "Canberra")
        answer = comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        assert answer.trace.steps() == ["cache_lookup", "model_answer", "retrieve",
                                        "digest", "synthesize", "cache_store"]

    def test_per_step_backend_call_accounting(self, harness):
        harness.script_simple_comprehensive(self.QUESTION, "Canberra")
        answer = comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        by_step = {r.step: r.calls for r in answer.trace.records}
        assert by_step["model_answer"] == {"mock": 1}
        assert by_step["retrieve"] == {"search": 1}
        assert by_step["digest"] == {"mock": 1}
        assert by_step["synthesize"] == {"mock": 1}
        assert by_step["cache_lookup"] == {}
        assert by_step["cache_store"] == {}

    def test_total_backend_calls(self, harness):
        harness.script_simple_comprehensive(self.QUESTION, "Canberra")
        comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        counts = harness.runtime.counter.counts()
        assert counts == {"mock": 3, "search": 1}

    def test_cache_entry_written(self, harness):
        harness.script_simple_comprehensive(self.QUESTION, "Canberra",
                                            url="https://e.com/au")
        comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        entries = harness.runtime.cache.entries()
        assert len(entries) == 1
        entry = entries[0]
        assert entry.query == self.QUESTION
        assert entry.key_info == "Canberra"
        assert entry.sources == ("https://e.com/au",)
        assert entry.fingerprint == "mock|hybrid_synthesis"

    def test_links_capped_by_link_count(self, make):
        h = make(link_count=2)
        question = "many sources question"
        h.script_cot(question, ["R.\nAnswer: x"])
        rows = [{"title": f"T{i}", "url": f"https://e.com/{i}", "snippet": "s"}
                for i in range(5)]
        h.add_search_fixture(question, rows)
        from queryflow.pipeline import format_snippets as fs
        docs = h.expected_docs([rows])
        snippets = fs(docs, h.config.digest_char_cap)
        h.script_digest(snippets, ["Answer: d"])
        h.script_synthesis("x", snippets, ["Answer: y"])
        answer = comprehensive_query(question, h.runtime.deps, NO_VARIANTS)
        assert answer.hybrid.links == [docs[0].url, docs[1].url]

    def test_blank_query_rejected(self, harness):
        with pytest.raises(ValueError):
            comprehensive_query("   ", harness.runtime.deps, NO_VARIANTS)


class TestComprehensiveWarm:
    QUESTION = "What is the capital of Australia?"

    def run_cold(self, harness):
        harness.script_simple_comprehensive(self.QUESTION, "Canberra",
                                            url="https://e.com/au")
        return comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)

    def test_repeat_is_a_cache_hit_with_zero_backend_calls(self, harness):
        self.run_cold(harness)
        before = harness.runtime.counter.counts()
        warm = comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        assert warm.cache_hit is True
        assert harness.runtime.counter.counts() == before

    def test_warm_hybrid_is_byte_identical_to_cold(self, harness):
        cold = self.run_cold(harness)
        warm = comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        cold_bytes = json.dumps(cold.hybrid.to_dict(), sort_keys=True).encode()
        warm_bytes = json.dumps(warm.hybrid.to_dict(), sort_keys=True).encode()
        assert cold_bytes == warm_bytes

    def test_warm_answer_uses_only_stored_fields(self, harness):
        self.run_cold(harness)
        warm = comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        assert warm.model_only == ""
        assert warm.search_only.results == []
        assert warm.search_only.digest == ""
        assert warm.trace.steps() == ["cache_lookup"]

    def test_rephrased_query_hits_same_entry(self, harness):
        cold = self.run_cold(harness)
        # Same token set after normalization (case, punctuation, articles).
        warm = comprehensive_query("what IS a capital of Australia??",
                                   harness.runtime.deps, NO_VARIANTS)
        assert warm.cache_hit is True
        assert warm.hybrid.summary == cold.hybrid.summary

    def test_use_cache_false_skips_lookup_and_store(self, harness):
        options = QueryOptions(use_cache=False, n_variants=0)
        harness.script_simple_comprehensive(self.QUESTION, "Canberra")
        first = comprehensive_query(self.QUESTION, harness.runtime.deps, options)
        assert first.trace.steps() == ["model_answer", "retrieve", "digest",
                                       "synthesize"]
        assert len(harness.runtime.cache.entries()) == 0
        before = harness.runtime.counter.counts()
        second = comprehensive_query(self.QUESTION, harness.runtime.deps, options)
        assert second.cache_hit is False
        after = harness.runtime.counter.counts()
        assert after["mock"] == before["mock"] + 3
        assert after["search"] == before["search"] + 1


class TestComprehensiveDegraded:
    QUESTION = "Who discovered pulsars?"

    def test_search_failure_falls_back_to_model_only(self, harness):
        harness.script_cot(self.QUESTION, ["R.\nAnswer: Jocelyn Bell Burnell"])
        answer = comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        assert answer.model_only == "Jocelyn Bell Burnell"
        assert answer.hybrid.summary == "Jocelyn Bell Burnell"
        assert answer.hybrid.links == []
        assert answer.search_only.results == []
        assert answer.search_only.digest.startswith("search unavailable:")

    def test_degradation_notes_on_trace(self, harness):
        harness.script_cot(self.QUESTION, ["R.\nAnswer: x"])
        answer = comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        notes = {r.step: r.note for r in answer.trace.records if r.note}
        assert notes["retrieve"] == "degraded: all searches failed"
        assert notes["synthesize"] == "degraded: hybrid falls back to model_only"

    def test_degraded_run_is_still_cached(self, harness):
        harness.script_cot(self.QUESTION, ["R.\nAnswer: x"])
        comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        warm = comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        assert warm.cache_hit is True
        assert warm.hybrid.summary == "x"

    def test_empty_search_results_fall_back_without_degradation_note(self, harness):
        harness.script_cot(self.QUESTION, ["R.\nAnswer: x"])
        harness.add_search_fixture(self.QUESTION, [])
        answer = comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        assert answer.hybrid.summary == "x"
        assert answer.search_only.digest == ""
        assert all(r.note is None for r in answer.trace.records)

    def test_model_failure_propagates_with_step_stamp(self, harness):
        def boom(*args, **kwargs):
            raise BackendUnavailable("llm down")

        harness.runtime.deps.llm.complete_text = boom
        with pytest.raises(BackendUnavailable) as exc_info:
            comprehensive_query(self.QUESTION, harness.runtime.deps, NO_VARIANTS)
        assert exc_info.value.step == "model_answer"


class TestSelfConsistencyIntegration:
    QUESTION = "Pick a letter."

    def test_majority_vote_wins(self, harness):
        harness.script_cot(self.QUESTION, ["R.\nAnswer: alpha",
                                           "R.\nAnswer: beta",
                                           "R.\nAnswer: alpha"])
        options = QueryOptions(self_consistency_n=3, n_variants=0)
        answer = comprehensive_query(self.QUESTION, harness.runtime.deps, options)
        assert answer.model_only == "alpha"
        # degraded search path: hybrid mirrors the voted answer
        assert answer.hybrid.summary == "alpha"

    def test_sampling_temperature_depends_on_n(self, harness):
        seen: list[tuple[float, int]] = []
        llm = harness.runtime.deps.llm
        original = llm.complete_text

        def spy(prompt, temperature=0.0, n=1, **kwargs):
            seen.append((temperature, n))
            return original(prompt, temperature=temperature, n=n, **kwargs)

        llm.complete_text = spy
        harness.script_cot(self.QUESTION, ["R.\nAnswer: a"])
        comprehensive_query(self.QUESTION, harness.runtime.deps,
                            QueryOptions(n_variants=0))
        harness.script_cot(self.QUESTION, ["R.\nAnswer: a", "R.\nAnswer: a",
                                           "R.\nAnswer: a"])
        comprehensive_query(self.QUESTION, harness.runtime.deps,
                            QueryOptions(self_consistency_n=3, n_variants=0,
                                         use_cache=False))
        assert seen[0] == (0.0, 1)
        assert seen[1] == (0.7, 3)


class TestExecuteDispatch:
    def test_arxiv_intent(self, harness):
        xml = (DATA_DIR / "arxiv" / "mamba.xml").read_text(encoding="utf-8")
        harness.add_arxiv_fixture("mamba", xml)
        intent = forced_intent(IntentKind.ARXIV_SEARCH, "mamba")
        answer = execute(intent, harness.runtime.deps)
        assert isinstance(answer, ToolAnswer)
        assert answer.kind is IntentKind.ARXIV_SEARCH
        assert [e.arxiv_id for e in answer.payload] == ["2400.00001v1", "2400.00002v2"]
        assert answer.trace.steps() == ["arxiv_search"]
        assert answer.to_dict()["payload"][0]["arxiv_id"] == "2400.00001v1"

    def test_arxiv_failure_is_stamped(self, harness):
        intent = forced_intent(IntentKind.ARXIV_SEARCH, "unscripted topic")
        with pytest.raises(BackendUnavailable) as exc_info:
            execute(intent, harness.runtime.deps)
        assert exc_info.value.step == "arxiv_search"

    def test_web_summarize_intent(self, harness):
        url = "https://example.com/doc"
        harness.add_page_fixture(url, "<main><p>Body.</p></main>")
        harness.script_web_summary(url, "Body.", ["Answer: A summary."])
        answer = execute(forced_intent(IntentKind.WEB_SUMMARIZE, url),
                         harness.runtime.deps)
        assert answer.kind is IntentKind.WEB_SUMMARIZE
        assert answer.payload == {"summary": "A summary.", "source": url}
        assert answer.trace.steps() == ["summarize_page"]

    def test_web_headers_intent(self, harness):
        url = "https://example.com/guide"
        html = (DATA_DIR / "headings" / "case03.html").read_text(encoding="utf-8")
        golden = json.loads((DATA_DIR / "headings" / "case03.json").read_text(encoding="utf-8"))
        harness.add_page_fixture(url, html)
        answer = execute(forced_intent(IntentKind.WEB_HEADERS, url),
                         harness.runtime.deps)
        assert answer.kind is IntentKind.WEB_HEADERS
        assert answer.payload.to_json_list() == golden
        assert answer.trace.steps() == ["fetch_page", "extract_headings"]
        assert answer.to_dict()["payload"] == golden

    def test_web_headers_missing_page_stamped(self, harness):
        intent = forced_intent(IntentKind.WEB_HEADERS, "https://example.com/nope")
        with pytest.raises(HttpError) as exc_info:
            execute(intent, harness.runtime.deps)
        assert exc_info.value.step == "fetch_page"

    def test_comprehensive_requires_query_text(self, harness):
        intent = forced_intent(IntentKind.COMPREHENSIVE, "whatever")
        with pytest.raises(ValueError):
            execute(intent, harness.runtime.deps, NO_VARIANTS, query=None)

    def test_comprehensive_dispatches_with_query(self, harness):
        question = "What is one plus one?"
        harness.script_simple_comprehensive(question, "two")
        answer = execute(forced_intent(IntentKind.COMPREHENSIVE, question),
                         harness.runtime.deps, NO_VARIANTS, query=question)
        assert isinstance(answer, TriChannelAnswer)
        assert answer.hybrid.summary == "two"


class TestChannelSerialization:
    def test_search_channel_ranks_are_recompacted(self):
        channel = SearchChannel(results=[doc("https://e.com/b", title="B"),
                                         doc("https://e.com/a", title="A")],
                                digest="d")
        payload = channel.to_dict()
        assert [row["rank"] for row in payload["results"]] == [1, 2]
        assert payload["results"][0]["url"] == "https://e.com/b"
        assert payload["digest"] == "d"

    def test_tri_channel_to_dict_shape(self, harness):
        question = "shape check"
        harness.script_simple_comprehensive(question, "ok")
        answer = comprehensive_query(question, harness.runtime.deps, NO_VARIANTS)
        payload = answer.to_dict()
        assert set(payload) == {"model_only", "search_only", "hybrid",
                                "cache_hit", "trace"}
        assert set(payload["hybrid"]) == {"summary", "links"}
        assert set(payload["search_only"]) == {"results", "digest"}
        assert isinstance(payload["trace"], list)
