"""QA benchmark loading, scoring and reporting.

Metric operationalizations (also stated in every report header):
accuracy is normalized exact match against any gold answer; precision,
recall and F1 are token-overlap scores against the best-matching gold;
mAP averages per-example average precision of the ranked evidence URLs
over the examples that declare gold evidence.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import DatasetParseError, DuplicateId
from .prompts import normalize_answer, tokenize

METRIC_NOTES = (
    "accuracy: normalized exact match against any gold answer. "
    "precision/recall/f1: token-overlap against the max-F1 gold answer, "
    "averaged over examples. map: mean average precision of ranked evidence "
    "URLs over examples with gold evidence; absent when no example has evidence."
)


@dataclass(frozen=True)
class QAExample:
    id: str
    question: str
    gold_answers: tuple[str, ...]
    gold_evidence_urls: tuple[str, ...] = ()
    long_answer: str | None = None


@dataclass(frozen=True)
class TokenOverlap:
    precision: float
    recall: float
    f1: float


@dataclass
class ExampleScore:
    example_id: str
    answer_text: str
    em: bool
    precision: float
    recall: float
    f1: float
    ap: float | None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.example_id,
            "answer_text": self.answer_text,
            "em": self.em,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "ap": self.ap,
            "error": self.error,
        }


@dataclass
class MetricReport:
    label: str
    accuracy: float
    precision: float
    recall: float
    f1: float
    map: float | None
    n_examples: int
    per_example: list[ExampleScore]
    notes: str = METRIC_NOTES

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "notes": self.notes,
            "n_examples": self.n_examples,
            "metrics": {
                "accuracy": self.accuracy,
                "precision": self.precision,
                "recall": self.recall,
                "f1": self.f1,
                "map": self.map,
            },
            "per_example": [score.to_dict() for score in self.per_example],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def to_markdown(self) -> str:
        def cell(value: float | None) -> str:
            return "n/a" if value is None else f"{value:.4f}"

        lines = [
            self.notes,
            "",
            "| Run | N | Accuracy | Precision | Recall | F1 | mAP |",
            "| --- | --- | --- | --- | --- | --- | --- |",
            f"| {self.label} | {self.n_examples} | {cell(self.accuracy)} | "
            f"{cell(self.precision)} | {cell(self.recall)} | {cell(self.f1)} | "
            f"{cell(self.map)} |",
        ]
        return "\n".join(lines) + "\n"


def load_dataset(path: Path) -> list[QAExample]:
    """JSONL dataset: one example per line, ids unique, gold answers non-empty."""
    examples: list[QAExample] = []
    seen: set[str] = set()
    content = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(content.splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetParseError(line_no, f"bad JSON: {exc}") from exc
        if not isinstance(row, dict):
            raise DatasetParseError(line_no, "example must be an object")
        example_id = row.get("id")
        question = row.get("question")
        golds = row.get("gold_answers")
        if not isinstance(example_id, str) or not example_id:
            raise DatasetParseError(line_no, "id must be a non-empty string")
        if not isinstance(question, str) or not question.strip():
            raise DatasetParseError(line_no, "question must be a non-empty string")
        if (not isinstance(golds, list) or not golds
                or not all(isinstance(g, str) for g in golds)):
            raise DatasetParseError(line_no, "gold_answers must be a non-empty string list")
        evidence = row.get("gold_evidence_urls", [])
        if not isinstance(evidence, list) or not all(isinstance(u, str) for u in evidence):
            raise DatasetParseError(line_no, "gold_evidence_urls must be a string list")
        long_answer = row.get("long_answer")
        if long_answer is not None and not isinstance(long_answer, str):
            raise DatasetParseError(line_no, "long_answer must be a string when present")
        if example_id in seen:
            raise DuplicateId(example_id)
        seen.add(example_id)
        examples.append(QAExample(
            id=example_id, question=question, gold_answers=tuple(golds),
            gold_evidence_urls=tuple(evidence), long_answer=long_answer))
    return examples


def exact_match(prediction: str, golds: tuple[str, ...] | list[str]) -> bool:
    """True when the normalized prediction equals any normalized gold."""
    normalized = normalize_answer(prediction)
    return any(normalized == normalize_answer(gold) for gold in golds)


def token_f1(prediction: str, gold: str) -> TokenOverlap:
    """Multiset token overlap. Both sides empty scores 1.0, one side empty 0.0."""
    pred_tokens = tokenize(prediction)
    gold_tokens = tokenize(gold)
    if not pred_tokens and not gold_tokens:
        return TokenOverlap(1.0, 1.0, 1.0)
    if not pred_tokens or not gold_tokens:
        return TokenOverlap(0.0, 0.0, 0.0)
    overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    if overlap == 0:
        return TokenOverlap(0.0, 0.0, 0.0)
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return TokenOverlap(precision, recall, 2 * precision * recall / (precision + recall))


def best_token_f1(prediction: str, golds: tuple[str, ...] | list[str]) -> TokenOverlap:
    """Overlap against the max-F1 gold; first gold wins ties."""
    best: TokenOverlap | None = None
    for gold in golds:
        score = token_f1(prediction, gold)
        if best is None or score.f1 > best.f1:
            best = score
    if best is None:
        raise ValueError("golds must be non-empty")
    return best


def average_precision(ranked_urls: list[str], relevant: set[str]) -> float:
    """AP = (1/|relevant|) * sum over relevant-hit positions i of (hits in top i)/i.

    Relevant URLs never retrieved contribute zero; appending non-relevant
    URLs after the last relevant hit leaves the score unchanged.
    """
    if not relevant:
        raise ValueError("relevant set must be non-empty")
    hits = 0
    total = 0.0
    seen: set[str] = set()
    for position, url in enumerate(ranked_urls, 1):
        if url in relevant and url not in seen:
            seen.add(url)
            hits += 1
            total += hits / position
    return total / len(relevant)


def _score_example(example: QAExample, answer_fn) -> ExampleScore:
    try:
        output = answer_fn(example)
        answer_text = str(output.get("answer_text", ""))
        ranked_urls = [str(url) for url in (output.get("ranked_urls") or [])]
    except Exception as exc:  # answer_fn failures score zero, run continues
        return ExampleScore(
            example_id=example.id, answer_text="", em=False,
            precision=0.0, recall=0.0, f1=0.0,
            ap=0.0 if example.gold_evidence_urls else None,
            error=f"{type(exc).__name__}: {exc}")
    overlap = best_token_f1(answer_text, example.gold_answers)
    ap = None
    if example.gold_evidence_urls:
        ap = average_precision(ranked_urls, set(example.gold_evidence_urls))
    return ExampleScore(
        example_id=example.id,
        answer_text=answer_text,
        em=exact_match(answer_text, example.gold_answers),
        precision=overlap.precision,
        recall=overlap.recall,
        f1=overlap.f1,
        ap=ap)


def run_benchmark(dataset: list[QAExample], answer_fn, *, label: str = "run",
                  workers: int = 1) -> MetricReport:
    """Score every example and aggregate; report order follows dataset order.

    answer_fn(example) must return {"answer_text": str, "ranked_urls": [str]}.
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1:
        scores = [_score_example(example, answer_fn) for example in dataset]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(lambda ex: _score_example(ex, answer_fn), dataset))
    n = len(scores)
    ap_scores = [score.ap for score in scores if score.ap is not None]
    return MetricReport(
        label=label,
        accuracy=sum(1.0 for s in scores if s.em) / n,
        precision=sum(s.precision for s in scores) / n,
        recall=sum(s.recall for s in scores) / n,
        f1=sum(s.f1 for s in scores) / n,
        map=sum(ap_scores) / len(ap_scores) if ap_scores else None,
        n_examples=n,
        per_example=scores)
