"""Prompt construction, answer extraction and self-consistency voting.

Templates live in small UTF-8 fixture files so they can be edited without
touching code: a front-matter header of ``key: value`` lines (``id`` and
``mode`` required, ``preamble`` and ``note`` optional), a ``---`` separator,
then the body. Bodies reference bindings as ``{name}``. Few-shot templates
read their demonstrations from a companion ``<id>.demos.jsonl`` file with one
``{"question", "chain", "answer"}`` object per line.

The step-by-step trigger sentence and the ``Answer:`` marker are fixed
literals; zero-shot chain-of-thought templates must end with the trigger.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import EmptyChains, MissingBinding

COT_TRIGGER = "Let's think step by step."
ANSWER_MARKER = "Answer:"

_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")
_ANSWER_MARKER_RE = re.compile(r"answer:", re.IGNORECASE)
_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")
_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


class PromptMode(str, Enum):
    ZERO_SHOT = "zero_shot"
    FEW_SHOT = "few_shot"
    ZERO_SHOT_COT = "zero_shot_cot"
    FEW_SHOT_COT = "few_shot_cot"


@dataclass(frozen=True)
class Demonstration:
    question: str
    chain: str
    answer: str


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    role_preamble: str
    body: str
    mode: PromptMode
    demonstrations: tuple[Demonstration, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("template id must be non-empty")
        if self.mode is PromptMode.ZERO_SHOT_COT and not self.body.rstrip().endswith(COT_TRIGGER):
            raise ValueError(f"zero-shot CoT template {self.id!r} must end with {COT_TRIGGER!r}")


def render_template(template: PromptTemplate, bindings: dict[str, str]) -> str:
    """Assemble preamble + demonstrations + body, substituting ``{name}`` bindings.

    Each placeholder occurrence is substituted exactly once; text inside
    binding values is never re-scanned. Unknown placeholders raise
    MissingBinding; extra bindings are ignored.
    """

    def _sub(match: re.Match) -> str:
        name = match.group(1)
        if name not in bindings:
            raise MissingBinding(name)
        return bindings[name]

    parts = []
    if template.role_preamble:
        parts.append(template.role_preamble)
    for demo in template.demonstrations:
        parts.append(f"Q: {demo.question}\nA: {demo.chain}\n{ANSWER_MARKER} {demo.answer}")
    parts.append(_PLACEHOLDER_RE.sub(_sub, template.body))
    return "\n\n".join(parts)


def extract_final_answer(chain_text: str) -> str:
    """Final answer of a reasoning chain.

    Everything after the last case-insensitive ``Answer:`` marker, trimmed.
    Without a marker, the last non-empty line; empty input yields "".
    """
    if not chain_text or not chain_text.strip():
        return ""
    last = None
    for match in _ANSWER_MARKER_RE.finditer(chain_text):
        last = match
    if last is not None:
        return chain_text[last.end():].strip()
    lines = [line for line in chain_text.splitlines() if line.strip()]
    return lines[-1].strip()


def extract_marked_answer(text: str) -> str:
    """Marker-aware variant for summary-like outputs.

    Text after the last ``Answer:`` marker when one is present, otherwise the
    whole trimmed text. Unlike extract_final_answer this never discards lines
    of a marker-free multi-line reply.
    """
    if not text:
        return ""
    last = None
    for match in _ANSWER_MARKER_RE.finditer(text):
        last = match
    if last is not None:
        return text[last.end():].strip()
    return text.strip()


def normalize_answer(answer: str) -> str:
    """Canonical comparison form of a short answer.

    Lowercase, remove punctuation, remove the articles a/an/the, collapse
    whitespace runs, trim. Idempotent.
    """
    text = answer.lower().translate(_PUNCT_TABLE)
    text = _ARTICLE_RE.sub(" ", text)
    return " ".join(text.split())


def tokenize(text: str) -> list[str]:
    """Whitespace tokens of the normalized form."""
    return normalize_answer(text).split()


@dataclass(frozen=True)
class ReasoningChain:
    """One sampled completion with its extracted and normalized answer."""

    prompt_id: str
    raw_text: str
    final_answer: str
    normalized_answer: str

    def __post_init__(self):
        if self.normalized_answer != normalize_answer(self.final_answer):
            raise ValueError("normalized_answer must equal normalize_answer(final_answer)")

    @classmethod
    def from_completion(cls, prompt_id: str, raw_text: str) -> "ReasoningChain":
        answer = extract_final_answer(raw_text)
        return cls(prompt_id, raw_text, answer, normalize_answer(answer))


def self_consistent_answer(chains: list[ReasoningChain]) -> tuple[str, dict[str, int]]:
    """Majority vote over chains grouped by normalized answer.

    Returns the un-normalized final answer of the earliest chain in the
    winning group plus the vote counts. Ties go to the group whose first
    occurrence is earliest, so the result is deterministic for a fixed
    chain order.
    """
    if not chains:
        raise EmptyChains("no reasoning chains to vote over")
    votes: dict[str, int] = {}
    first_index: dict[str, int] = {}
    for i, chain in enumerate(chains):
        key = chain.normalized_answer
        votes[key] = votes.get(key, 0) + 1
        first_index.setdefault(key, i)
    winner = max(votes, key=lambda key: (votes[key], -first_index[key]))
    return chains[first_index[winner]].final_answer, votes


# --- template loading -------------------------------------------------------

_FRONT_MATTER_KEYS = {"id", "mode", "preamble", "note"}

_QA_TEMPLATE_IDS = {
    PromptMode.ZERO_SHOT: "qa_zero_shot",
    PromptMode.FEW_SHOT: "qa_few_shot",
    PromptMode.ZERO_SHOT_COT: "qa_zero_shot_cot",
    PromptMode.FEW_SHOT_COT: "qa_few_shot_cot",
}


def _parse_template_text(text: str, demos: tuple[Demonstration, ...], origin: str) -> PromptTemplate:
    if "\n---\n" in text:
        head, body = text.split("\n---\n", 1)
    else:
        raise ValueError(f"{origin}: missing '---' separator between header and body")
    fields: dict[str, str] = {}
    for line_no, line in enumerate(head.splitlines(), 1):
        if not line.strip():
            continue
        if ":" not in line:
            raise ValueError(f"{origin}: bad header line {line_no}: {line!r}")
        key, value = line.split(":", 1)
        key = key.strip()
        if key not in _FRONT_MATTER_KEYS:
            raise ValueError(f"{origin}: unknown header key {key!r}")
        fields[key] = value.strip()
    if "id" not in fields or "mode" not in fields:
        raise ValueError(f"{origin}: header must define id and mode")
    mode = PromptMode(fields["mode"])
    return PromptTemplate(
        id=fields["id"],
        role_preamble=fields.get("preamble", ""),
        body=body.rstrip("\n"),
        mode=mode,
        demonstrations=demos,
    )


def _parse_demos(text: str, origin: str) -> tuple[Demonstration, ...]:
    demos = []
    for line_no, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{origin}: line {line_no}: {exc}") from exc
        try:
            demos.append(Demonstration(row["question"], row["chain"], row["answer"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"{origin}: line {line_no}: demo needs question/chain/answer") from exc
    return tuple(demos)


def load_template_file(path: Path) -> PromptTemplate:
    path = Path(path)
    demos: tuple[Demonstration, ...] = ()
    demo_path = path.with_name(path.stem + ".demos.jsonl")
    if demo_path.exists():
        demos = _parse_demos(demo_path.read_text(encoding="utf-8"), str(demo_path))
    return _parse_template_text(path.read_text(encoding="utf-8"), demos, str(path))


class TemplateLibrary:
    """Lookup table of templates by id."""

    def __init__(self, templates: dict[str, PromptTemplate] | None = None):
        self._templates: dict[str, PromptTemplate] = dict(templates or {})

    def get(self, template_id: str) -> PromptTemplate:
        if template_id not in self._templates:
            raise KeyError(f"unknown template {template_id!r}")
        return self._templates[template_id]

    def render(self, template_id: str, **bindings: str) -> str:
        return render_template(self.get(template_id), bindings)

    def ids(self) -> list[str]:
        return sorted(self._templates)

    def with_overrides(self, other: "TemplateLibrary") -> "TemplateLibrary":
        merged = dict(self._templates)
        merged.update(other._templates)
        return TemplateLibrary(merged)

    @classmethod
    def from_dir(cls, path: Path) -> "TemplateLibrary":
        templates = {}
        for file in sorted(Path(path).glob("*.txt")):
            template = load_template_file(file)
            templates[template.id] = template
        return cls(templates)


_BUILTIN: TemplateLibrary | None = None


def builtin_library() -> TemplateLibrary:
    """Templates shipped with the package (cached)."""
    global _BUILTIN
    if _BUILTIN is None:
        with resources.as_file(resources.files("queryflow") / "templates") as template_dir:
            _BUILTIN = TemplateLibrary.from_dir(template_dir)
    return _BUILTIN


def build_cot_prompt(question: str, context: str | None = None,
                     mode: PromptMode = PromptMode.ZERO_SHOT_COT,
                     library: TemplateLibrary | None = None) -> str:
    """Render the QA prompt for ``mode``, with an optional context section.

    A present context is inserted as a ``Context:`` block ahead of the
    question; zero-shot CoT prompts always end with the trigger sentence.
    """
    if not question or not question.strip():
        raise ValueError("question must be non-empty")
    library = library or builtin_library()
    template = library.get(_QA_TEMPLATE_IDS[mode])
    context_block = f"Context:\n{context}\n\n" if context is not None else ""
    return render_template(template, {"question": question, "context_block": context_block})
