"""Command line entry point.

Exit codes: 0 success, 1 user error (usage, empty query, malformed URL,
bad dataset or config), 2 backend or store failure. ``--json`` prints the
same envelope the HTTP service returns, so shell pipelines and the service
share one wire shape.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import ServiceConfig
from .errors import DatasetParseError, DuplicateId, MalformedUrl, QueryflowError
from .evaluation import load_dataset, run_benchmark
from .pipeline import ToolAnswer, TriChannelAnswer
from .router import Intent, IntentKind
from .runtime import QUERY_MODES, Runtime, build_runtime, default_options, run_query
from .service import query_envelope


def _load_config(config_path: str | None) -> ServiceConfig:
    if config_path is None:
        return ServiceConfig()
    return ServiceConfig.from_file(Path(config_path))


def _render_human(intent: Intent, result: ToolAnswer | TriChannelAnswer) -> str:
    if isinstance(result, TriChannelAnswer):
        lines = ["[model only]", result.model_only or "(empty)", "", "[search]"]
        lines.append(result.search_only.digest or "(no digest)")
        for i, doc in enumerate(result.search_only.results, 1):
            lines.append(f"{i}. {doc.title or doc.url}")
            lines.append(f"   {doc.url}")
        lines += ["", "[hybrid]", result.hybrid.summary or "(empty)"]
        for url in result.hybrid.links:
            lines.append(f"  - {url}")
        if result.cache_hit:
            lines += ["", "(cache hit)"]
        return "\n".join(lines)
    if intent.kind is IntentKind.ARXIV_SEARCH:
        if not result.payload:
            return "(no results)"
        lines = []
        for i, entry in enumerate(result.payload, 1):
            lines.append(f"{i}. {entry.title} ({entry.published})")
            lines.append(f"   {', '.join(entry.authors)}")
            lines.append(f"   {entry.link}")
        return "\n".join(lines)
    if intent.kind is IntentKind.WEB_HEADERS:
        outline = result.payload.to_outline()
        return outline or "(no headings)"
    record = result.payload
    return f"{record['summary']}\nsource: {record['source']}"


@click.group()
def cli() -> None:
    """Retrieval-augmented question answering over mock or live backends."""


@cli.command()
@click.argument("text")
@click.option("--mode", type=click.Choice(QUERY_MODES), default="auto",
              help="Force an intent instead of routing the text.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON config file.")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON envelope.")
@click.option("--no-cache", is_flag=True, help="Skip cache lookup and store.")
@click.option("--self-consistency", "self_consistency_n", type=click.IntRange(1, 10),
              default=None, help="Sampled reasoning chains to vote over.")
@click.option("--k", "k_search", type=click.IntRange(1, 10), default=None,
              help="Search results to retrieve.")
def query(text: str, mode: str, config_path: str | None, as_json: bool,
          no_cache: bool, self_consistency_n: int | None, k_search: int | None) -> None:
    """Answer TEXT, routing it to a tool or the comprehensive pipeline."""
    if not text.strip():
        raise click.UsageError("query text must be non-empty")
    runtime = build_runtime(_load_config(config_path))
    options = default_options(runtime.config, use_cache=not no_cache,
                              self_consistency_n=self_consistency_n, k_search=k_search)
    intent, result = run_query(runtime, text, mode=mode, options=options)
    if as_json:
        click.echo(json.dumps(query_envelope(intent, result), indent=2, ensure_ascii=False))
    else:
        click.echo(_render_human(intent, result))


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON config file.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=click.IntRange(1, 65535), default=None,
              help="Override the configured port.")
def serve(config_path: str | None, host: str, port: int | None) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    config = _load_config(config_path)
    app = create_app(config)
    uvicorn.run(app, host=host, port=port or config.port)


@cli.command(name="eval")
@click.option("--dataset", "dataset", required=True,
              type=click.Path(exists=True, dir_okay=False), help="JSONL QA dataset.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None,
              help="Write the full JSON report to this file.")
@click.option("--markdown", "markdown_path", type=click.Path(dir_okay=False), default=None,
              help="Write the markdown table to this file.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON config file.")
@click.option("--label", default="run", show_default=True)
@click.option("--use-cache", is_flag=True,
              help="Allow cache hits; benchmarks bypass the cache by default.")
def eval_command(dataset: str, report_path: str | None, markdown_path: str | None,
                 config_path: str | None, label: str, use_cache: bool) -> None:
    """Score the comprehensive pipeline on a JSONL QA dataset."""
    runtime = build_runtime(_load_config(config_path))
    examples = load_dataset(Path(dataset))
    options = default_options(runtime.config, use_cache=use_cache)

    def answer(example):
        _intent, result = run_query(runtime, example.question,
                                    mode="comprehensive", options=options)
        return {
            "answer_text": result.hybrid.summary,
            "ranked_urls": [doc.url for doc in result.search_only.results],
        }

    report = run_benchmark(examples, answer, label=label)
    if report_path is not None:
        Path(report_path).write_text(report.to_json(), encoding="utf-8")
    if markdown_path is not None:
        Path(markdown_path).write_text(report.to_markdown(), encoding="utf-8")
    click.echo(report.to_markdown(), nl=False)


@cli.group()
def cache() -> None:
    """Inspect or reset the answer cache."""


@cache.command(name="ls")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON config file.")
@click.option("--json", "as_json", is_flag=True)
def cache_ls(config_path: str | None, as_json: bool) -> None:
    """List cached entries in append order."""
    runtime = build_runtime(_load_config(config_path))
    entries = runtime.cache.entries()
    if as_json:
        click.echo(json.dumps([json.loads(entry.to_json_line()) for entry in entries],
                              indent=2, ensure_ascii=False))
        return
    if not entries:
        click.echo("(empty cache)")
        return
    for entry in entries:
        click.echo(f"{entry.created_at}  {entry.fingerprint or '-'}  {entry.query}")


@cache.command(name="clear")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON config file.")
@click.option("--json", "as_json", is_flag=True)
def cache_clear(config_path: str | None, as_json: bool) -> None:
    """Drop every cached entry."""
    runtime = build_runtime(_load_config(config_path))
    cleared = runtime.cache.clear()
    click.echo(json.dumps({"cleared": cleared}) if as_json else f"cleared {cleared}")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except (MalformedUrl, DatasetParseError, DuplicateId) as exc:
        click.echo(f"error: {exc.message}", err=True)
        return 1
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except QueryflowError as exc:
        click.echo(f"error [{exc.kind}]: {exc.message}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
