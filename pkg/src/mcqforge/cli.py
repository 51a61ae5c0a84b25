"""Command-line interface.

Subcommands: generate, record, lint, readability, eval, export, serve.
Flat files everywhere (bank JSONL, transcript JSONL, ratings JSONL); the
API key for live runs comes from the environment only.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import bank as bankmod
from . import evalstats
from .config import AppConfig
from .core import GenerationRequest, GradeBand
from .gateway import DEFAULT_MODEL, Gateway, HttpProvider
from .iwf import IwfConfig, lint as lint_mcq
from .language import flesch_kincaid_grade
from .supervisor import run_batch


def load_requests(path: str | Path, defaults: dict) -> list[GenerationRequest]:
    """Read a JSONL requests file. Each line is a full request object or a
    partial one (e.g. just learning_objective); CLI flags fill the gaps."""
    requests = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                merged = {**defaults, **record}
                requests.append(GenerationRequest.from_dict(merged))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise click.ClickException(f"{path}:{line_no}: bad request record ({exc})")
    return requests


def _build_gateway(config: AppConfig) -> Gateway:
    provider = HttpProvider(base_url=config.base_url) if config.mode != "replay" else None
    return Gateway(mode=config.mode, transcript_path=config.transcript_path, provider=provider)


def _mode_options(fn):
    fn = click.option("--replay", "replay_path", type=click.Path(), help="Replay transcript (no network).")(fn)
    fn = click.option("--record", "record_path", type=click.Path(), help="Record transcript while calling live.")(fn)
    fn = click.option("--live", is_flag=True, help="Call the provider without recording.")(fn)
    return fn


def _resolve_mode(live: bool, record_path: str | None, replay_path: str | None) -> tuple[str, str | None]:
    chosen = [name for name, on in (("live", live), ("record", record_path), ("replay", replay_path)) if on]
    if len(chosen) != 1:
        raise click.ClickException("choose exactly one of --live, --record PATH, --replay PATH")
    mode = chosen[0]
    return mode, record_path if mode == "record" else replay_path


@click.group()
def main() -> None:
    """Multi-agent MCQ generation and review for AI-literacy assessment."""


def _generate_options(fn):
    fn = click.option("--objectives", type=click.Path(exists=True), help="JSONL requests file.")(fn)
    fn = click.option("--objective", help="Single learning objective (alternative to --objectives).")(fn)
    fn = click.option("--bloom", default="understand", show_default=True, help="Bloom level name.")(fn)
    fn = click.option("--grades", default="7-9", show_default=True, help="Grade band, e.g. 7-9.")(fn)
    fn = click.option("--scenario", default=None, help="Optional grounding scenario.")(fn)
    fn = click.option("--option-count", default=4, show_default=True, type=int)(fn)
    fn = click.option("--model", default=DEFAULT_MODEL, show_default=True)(fn)
    fn = click.option("--base-url", default="https://api.openai.com/v1", show_default=True)(fn)
    fn = click.option("--max-revisions", default=3, show_default=True, type=int)(fn)
    fn = click.option("--max-flaws", default=1, show_default=True, type=int)(fn)
    fn = click.option("--workers", default=4, show_default=True, type=int)(fn)
    fn = click.option("--seed", default=0, show_default=True, type=int, help="Display-order shuffle seed.")(fn)
    fn = click.option("--out", "out_path", default="bank.jsonl", show_default=True, type=click.Path())(fn)
    fn = click.option("--report", "report_path", default="run_report.json", show_default=True, type=click.Path())(fn)
    return fn


def _run_generate(mode, transcript_path, objectives, objective, bloom, grades, scenario,
                  option_count, model, base_url, max_revisions, max_flaws, workers, seed,
                  out_path, report_path) -> None:
    config = AppConfig(
        model=model,
        mode=mode,
        transcript_path=transcript_path,
        max_revisions=max_revisions,
        max_flaws=max_flaws,
        option_count=option_count,
        workers=workers,
        seed=seed,
        base_url=base_url,
    )
    try:
        config.validate()
    except ValueError as exc:
        raise click.ClickException(str(exc))

    defaults = {
        "bloom_level": bloom,
        "grade_band": {"low": GradeBand.parse(grades).low, "high": GradeBand.parse(grades).high},
        "scenario": scenario,
        "option_count": option_count,
    }
    if objectives:
        requests = load_requests(objectives, defaults)
    elif objective:
        requests = [GenerationRequest.from_dict({**defaults, "learning_objective": objective})]
    else:
        raise click.ClickException("provide --objectives FILE or --objective TEXT")

    gateway = _build_gateway(config)
    bank_entries, report = run_batch(gateway, requests, config)
    bankmod.save_bank(out_path, bank_entries)
    Path(report_path).write_text(
        json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    summary = report["summary"]
    click.echo(
        f"generated {summary['approved']} approved, {summary['needs_human_review']} needs_human_review, "
        f"{summary['failed']} failed -> {out_path}"
    )
    if summary["failed"]:
        sys.exit(2)


@main.command()
@_mode_options
@_generate_options
def generate(live, record_path, replay_path, **kwargs) -> None:
    """Generate a question bank through the full critique/revision workflow."""
    mode, transcript_path = _resolve_mode(live, record_path, replay_path)
    _run_generate(mode, transcript_path, **kwargs)


@main.command()
@click.option("--transcript", "transcript_path", required=True, type=click.Path(),
              help="Transcript file to write while calling the live provider.")
@_generate_options
def record(transcript_path, **kwargs) -> None:
    """Generate live and record the transcript for later replay."""
    _run_generate("record", transcript_path, **kwargs)


@main.command("lint")
@click.argument("bank_path", type=click.Path(exists=True))
@click.option("--format", "fmt", default="table", type=click.Choice(["table", "json"]), show_default=True)
@click.option("--max-flaws", default=1, show_default=True, type=int)
def lint_command(bank_path, fmt, max_flaws) -> None:
    """Run the deterministic item-writing-flaw rules over a bank file.

    Exits nonzero when any question exceeds --max-flaws."""
    entries = bankmod.load_bank(bank_path)
    config = IwfConfig()
    rows = []
    worst = 0
    for mcq, _ in entries:
        report = lint_mcq(mcq, config)
        worst = max(worst, report.flaw_count)
        rows.append(
            {
                "id": mcq.id,
                "flaw_count": report.flaw_count,
                "flags": [{"category": f.category.value, "evidence": f.evidence} for f in report.flags],
            }
        )
    if fmt == "json":
        click.echo(json.dumps({"questions": rows, "max_flaws": max_flaws}, ensure_ascii=False, indent=2))
    else:
        for row in rows:
            status = "ok" if row["flaw_count"] <= max_flaws else "FLAWED"
            click.echo(f"{row['id']}  flaws={row['flaw_count']}  {status}")
            for flag in row["flags"]:
                click.echo(f"    {flag['category']}: {flag['evidence']}")
    if worst > max_flaws:
        sys.exit(1)


@main.command()
@click.argument("text", required=False)
def readability(text) -> None:
    """Flesch-Kincaid grade of TEXT (or stdin), for debugging."""
    source = text if text is not None else sys.stdin.read()
    try:
        grade = flesch_kincaid_grade(source)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"{grade:.2f}")


@main.command("eval")
@click.option("--ratings", "ratings_path", required=True, type=click.Path(exists=True))
@click.option("--bank", "bank_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="json", type=click.Choice(["json", "csv"]), show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(), help="Output file (default: stdout).")
def eval_command(ratings_path, bank_path, fmt, out_path) -> None:
    """Compute the rubric evaluation report from a ratings file."""
    try:
        ratings = evalstats.load_ratings(ratings_path)
        index = bankmod.bank_index(bankmod.load_bank(bank_path))
        report = evalstats.compute_report(ratings, index)
    except (evalstats.RatingValidationError, evalstats.UnknownQuestionError, bankmod.BankFormatError) as exc:
        raise click.ClickException(str(exc))
    rendered = evalstats.report_to_json(report) if fmt == "json" else evalstats.report_to_csv(report)
    if out_path:
        Path(out_path).write_text(rendered, encoding="utf-8")
    else:
        click.echo(rendered, nl=False)


@main.command()
@click.argument("bank_path", type=click.Path(exists=True))
@click.option("--format", "fmt", required=True, type=click.Choice(["json", "csv", "gift"]))
@click.option("--out", "out_path", default=None, type=click.Path(), help="Output file (default: stdout).")
def export(bank_path, fmt, out_path) -> None:
    """Export a bank to JSON, CSV, or GIFT."""
    entries = bankmod.load_bank(bank_path)
    if not entries:
        click.echo("warning: bank is empty", err=True)
    rendered = bankmod.export_bank(entries, fmt)
    if out_path:
        Path(out_path).write_text(rendered, encoding="utf-8")
    else:
        click.echo(rendered, nl=False)


@main.command()
@click.option("--bank", "bank_path", required=True, type=click.Path(exists=True))
@click.option("--ratings", "ratings_path", required=True, type=click.Path())
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ui-dir", default=None, type=click.Path(), help="Static assets for the review UI.")
def serve(bank_path, ratings_path, port, host, ui_dir) -> None:
    """Serve the review API (and UI assets when --ui-dir is given)."""
    import uvicorn

    from .server import create_app

    app = create_app(bank_path=bank_path, ratings_path=ratings_path, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
