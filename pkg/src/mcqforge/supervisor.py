"""Supervisor and workflow state machine.

One workflow runs generate -> critique -> decide, looping through revision
until the draft is acceptable or the revision budget is spent. The
supervisor itself is deterministic routing over the two critique reports:
a draft is approved when the flaw count is within budget AND the language
verdict passes; otherwise it goes back to the generator with the critics'
feedback (language directives first, then one per flagged flaw category),
until max_revisions is reached and the question is handed to a human.

Both critics always see the same draft and neither sees the other's
report. Exhausted questions are kept (status needs_human_review) rather
than discarded, so teachers can salvage near-misses.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .config import AppConfig
from .core import MCQ, GenerationRequest, McqStatus, derive_mcq_id, make_display_order
from .gateway import Gateway, GatewayError
from .generator import Directive, RevisionDirectives, generate_draft, revise_draft
from .iwf import IwfReport, is_acceptable, run_iwf_critique
from .language import LanguageReport, review_language

logger = logging.getLogger(__name__)

APPROVE = "approve"
REVISE = "revise"
STOP_NEEDS_REVIEW = "stop_needs_review"


@dataclass(frozen=True)
class Decision:
    kind: str  # approve | revise | stop_needs_review
    directives: RevisionDirectives = ()

    def __post_init__(self) -> None:
        if self.kind == REVISE and not self.directives:
            raise ValueError("a revise decision must carry directives")


@dataclass
class WorkflowState:
    """Per-question record: current draft, critique history, terminal status."""

    request: GenerationRequest
    current: MCQ
    history: list[tuple[MCQ, IwfReport, LanguageReport]] = field(default_factory=list)
    revisions_used: int = 0
    status: str = "in_progress"
    gateway_calls: int = 0


class WorkflowAbortError(Exception):
    """Gateway failure mid-workflow; carries the partial state."""

    def __init__(self, message: str, state: WorkflowState | None):
        super().__init__(message)
        self.state = state


def _directives_from_reports(iwf: IwfReport, lang: LanguageReport) -> RevisionDirectives:
    directives = [Directive("language", instruction) for instruction in lang.feedback]
    seen: set[str] = set()
    for flag in iwf.flags:
        # One directive per flagged category, first evidence wins.
        if flag.category.value in seen:
            continue
        seen.add(flag.category.value)
        directives.append(Directive("iwf", f"resolve item-writing flaw {flag.category.value}: {flag.evidence}"))
    return tuple(directives)


def decide(
    iwf: IwfReport,
    lang: LanguageReport,
    revisions_used: int,
    *,
    max_flaws: int = 1,
    max_revisions: int = 3,
) -> Decision:
    """Route one critiqued draft: approve, revise, or stop for human review."""
    if is_acceptable(iwf, max_flaws) and lang.verdict == "pass":
        return Decision(APPROVE)
    if revisions_used >= max_revisions:
        return Decision(STOP_NEEDS_REVIEW)
    return Decision(REVISE, _directives_from_reports(iwf, lang))


def _critique(mcq: MCQ, config: AppConfig, gateway: Gateway) -> tuple[IwfReport, LanguageReport]:
    iwf_report = run_iwf_critique(
        mcq,
        gateway=gateway if config.use_iwf_probe else None,
        use_probe=config.use_iwf_probe,
        model=config.model,
    )
    lang_report = review_language(
        mcq,
        mcq.grade_band,
        use_llm=config.use_llm_language,
        gateway=gateway if config.use_llm_language else None,
        model=config.model,
    )
    return iwf_report, lang_report


def run_workflow(gateway: Gateway, req: GenerationRequest, config: AppConfig, seq: int = 0) -> WorkflowState:
    """Run one question to a terminal state (approved or needs_human_review)."""
    state: WorkflowState | None = None
    try:
        draft, attempts = generate_draft(
            gateway,
            req,
            mcq_id=derive_mcq_id(req, seq),
            model=config.model,
            temperature=config.generation_temperature,
        )
        state = WorkflowState(request=req, current=draft, gateway_calls=1)
        while True:
            iwf_report, lang_report = _critique(state.current, config, gateway)
            state.gateway_calls += int(config.use_iwf_probe) + int(config.use_llm_language)
            state.history.append((state.current, iwf_report, lang_report))
            decision = decide(
                iwf_report,
                lang_report,
                state.revisions_used,
                max_flaws=config.max_flaws,
                max_revisions=config.max_revisions,
            )
            if decision.kind == APPROVE:
                state.current = state.current.with_status(McqStatus.APPROVED)
                state.status = "approved"
                return state
            if decision.kind == STOP_NEEDS_REVIEW:
                state.current = state.current.with_status(McqStatus.NEEDS_HUMAN_REVIEW)
                state.status = "needs_human_review"
                return state
            state.current, _ = revise_draft(
                gateway,
                state.current,
                decision.directives,
                req,
                model=config.model,
                temperature=config.generation_temperature,
            )
            state.gateway_calls += 1
            state.revisions_used += 1
    except GatewayError as exc:
        raise WorkflowAbortError(str(exc), state) from exc


def run_batch(
    gateway: Gateway, requests: list[GenerationRequest], config: AppConfig
) -> tuple[list[tuple[MCQ, tuple[int, ...]]], dict]:
    """Independent workflows per request, in parallel up to config.workers.

    Returns the question bank (terminal MCQs with their seeded display
    orders, in request order) and a run report. Per-request failures land
    in the report instead of aborting the batch.
    """
    calls_before = gateway.stats()["total_calls"]

    def one(indexed: tuple[int, GenerationRequest]):
        index, req = indexed
        try:
            return index, run_workflow(gateway, req, config, seq=index), None
        except WorkflowAbortError as exc:
            return index, None, str(exc)

    if config.workers > 1 and len(requests) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(one, enumerate(requests)))
    else:
        outcomes = [one(item) for item in enumerate(requests)]
    outcomes.sort(key=lambda item: item[0])

    bank: list[tuple[MCQ, tuple[int, ...]]] = []
    question_rows = []
    failures = []
    histogram: dict[str, int] = {}
    counts = {"approved": 0, "needs_human_review": 0}
    for index, state, error in outcomes:
        if state is None:
            failures.append({"index": index, "error": error})
            logger.warning("request %d failed: %s", index, error)
            continue
        bank.append((state.current, make_display_order(state.current, config.seed)))
        counts[state.status] += 1
        histogram[str(state.revisions_used)] = histogram.get(str(state.revisions_used), 0) + 1
        question_rows.append(
            {
                "id": state.current.id,
                "status": state.status,
                "revisions_used": state.revisions_used,
                "flaw_counts": [iwf.flaw_count for _, iwf, _ in state.history],
                "language_verdicts": [lang.verdict for _, _, lang in state.history],
                "fk_grades": [round(lang.fk_grade, 4) for _, _, lang in state.history],
            }
        )

    report = {
        "summary": {
            "total_requests": len(requests),
            "approved": counts["approved"],
            "needs_human_review": counts["needs_human_review"],
            "failed": len(failures),
            "revision_histogram": dict(sorted(histogram.items())),
            "total_gateway_calls": gateway.stats()["total_calls"] - calls_before,
        },
        "questions": question_rows,
        "failures": failures,
    }
    return bank, report
