"""Generator agent: turns a request (plus optional reviewer feedback) into
an MCQ draft through one structured completion.

Prompt templates live as versioned text assets under ``prompts/``; the
template version is recorded in each question's provenance. Prompt
building is pure, so identical inputs render byte-identical prompts and
replay transcripts resolve them exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .core import (
    MCQ,
    BloomLevel,
    GenerationRequest,
    McqStatus,
    derive_mcq_id,
    normalize_text,
    validate_mcq,
)
from .gateway import CompletionRequest, Gateway, register_schema

GENERATE_PROMPT_ID = "generate.v1"
REVISE_PROMPT_ID = "revise.v1"
MCQ_SCHEMA_ID = "mcq.v1"

# Fixed one-line level definitions embedded in prompts. These are this
# project's wording of the standard six-level taxonomy.
BLOOM_DEFINITIONS: dict[BloomLevel, str] = {
    BloomLevel.REMEMBER: "recall facts and basic concepts",
    BloomLevel.UNDERSTAND: "explain ideas or concepts in one's own words",
    BloomLevel.APPLY: "use information in new situations",
    BloomLevel.ANALYZE: "draw connections among ideas and examine structure",
    BloomLevel.EVALUATE: "justify a judgment, stand, or decision",
    BloomLevel.CREATE: "produce new or original work",
}

DEFAULT_GENERATION_TEMPERATURE = 0.7


class GenerationOutputError(Exception):
    """Model output that fit the schema shape but not the question contract."""


class MissingFieldError(GenerationOutputError):
    pass


class DistractorCountError(GenerationOutputError):
    pass


class DuplicateOptionsError(GenerationOutputError):
    pass


class EmptyDirectivesError(ValueError):
    pass


@dataclass(frozen=True)
class Directive:
    """One reviewer instruction sent back to the generator."""

    source: str  # "language", "iwf", or "supervisor"
    instruction: str

    def __post_init__(self) -> None:
        if self.source not in ("language", "iwf", "supervisor"):
            raise ValueError(f"unknown directive source {self.source!r}")
        if not self.instruction.strip():
            raise ValueError("directive instruction must be nonempty")


RevisionDirectives = tuple[Directive, ...]


def _load_template(prompt_id: str) -> str:
    return resources.files("mcqforge").joinpath(f"prompts/{prompt_id}.txt").read_text(encoding="utf-8")


def _mcq_schema(payload: dict) -> list[str]:
    problems = []
    for field_name in ("stem", "key"):
        if not isinstance(payload.get(field_name), str) or not payload.get(field_name, "").strip():
            problems.append(f"missing or empty field {field_name!r}")
    distractors = payload.get("distractors")
    if not isinstance(distractors, list) or not distractors or not all(
        isinstance(d, str) and d.strip() for d in distractors
    ):
        problems.append("field 'distractors' must be a nonempty list of nonempty strings")
    return problems


register_schema(MCQ_SCHEMA_ID, _mcq_schema)


def semantic_mcq_validator(req: GenerationRequest):
    """Checks beyond the schema shape that should consume repair attempts:
    exact distractor count and no duplicated options."""

    def check(payload: dict) -> list[str]:
        problems = []
        expected = req.option_count - 1
        distractors = payload.get("distractors", [])
        if len(distractors) != expected:
            problems.append(f"expected {expected} distractors, got {len(distractors)}")
        key_norm = normalize_text(payload.get("key", ""))
        seen = {key_norm}
        for d in distractors:
            d_norm = normalize_text(d)
            if d_norm in seen:
                problems.append(f"option duplicated after normalization: {d!r}")
            seen.add(d_norm)
        return problems

    return check


def _bloom_fields(req: GenerationRequest) -> dict:
    return {
        "objective": req.learning_objective,
        "bloom_name": req.bloom_level.label,
        "bloom_definition": BLOOM_DEFINITIONS[req.bloom_level],
        "grade_low": req.grade_band.low,
        "grade_high": req.grade_band.high,
        "option_count": req.option_count,
        "distractor_count": req.option_count - 1,
    }


def build_generation_prompt(
    req: GenerationRequest,
    model: str,
    temperature: float = DEFAULT_GENERATION_TEMPERATURE,
    max_attempts: int = 3,
) -> CompletionRequest:
    """Render the first-draft prompt. The scenario block is omitted entirely
    when the request carries no scenario."""
    scenario_block = f"Scenario to ground the question in: {req.scenario}\n" if req.scenario else ""
    rendered = _load_template(GENERATE_PROMPT_ID).format(scenario_block=scenario_block, **_bloom_fields(req))
    return CompletionRequest(
        prompt_id=GENERATE_PROMPT_ID,
        rendered_prompt=rendered,
        schema_id=MCQ_SCHEMA_ID,
        model=model,
        temperature=temperature,
        max_attempts=max_attempts,
    )


def render_question_block(mcq: MCQ) -> str:
    """The full current question as embedded in revision/review prompts.
    Canonical order; the key is labeled so the reviser keeps it correct."""
    lines = [f"Stem: {mcq.stem}", f"Correct option: {mcq.key}"]
    lines += [f"Incorrect option: {d}" for d in mcq.distractors]
    return "\n".join(lines)


def build_revision_prompt(
    mcq: MCQ,
    directives: RevisionDirectives,
    req: GenerationRequest,
    model: str,
    temperature: float = DEFAULT_GENERATION_TEMPERATURE,
    max_attempts: int = 3,
) -> CompletionRequest:
    """Render the revision prompt: whole current question, then each
    directive labeled by source, in the order given."""
    if not directives:
        raise EmptyDirectivesError("revision requires at least one directive")
    directive_lines = "\n".join(f"- [{d.source}] {d.instruction}" for d in directives)
    rendered = _load_template(REVISE_PROMPT_ID).format(
        current_question=render_question_block(mcq),
        directives=directive_lines,
        **_bloom_fields(req),
    )
    return CompletionRequest(
        prompt_id=REVISE_PROMPT_ID,
        rendered_prompt=rendered,
        schema_id=MCQ_SCHEMA_ID,
        model=model,
        temperature=temperature,
        max_attempts=max_attempts,
    )


def parse_generation_output(
    payload: dict,
    req: GenerationRequest,
    mcq_id: str | None = None,
    revision: int = 0,
    provenance: dict | None = None,
) -> MCQ:
    """Build a draft MCQ from a structured payload, enforcing the question
    contract. Never returns an MCQ with validate_mcq violations."""
    for field_name in ("stem", "key", "distractors"):
        if field_name not in payload:
            raise MissingFieldError(f"payload missing field {field_name!r}")
    distractors = payload["distractors"]
    expected = req.option_count - 1
    if len(distractors) != expected:
        raise DistractorCountError(f"expected {expected} distractors, got {len(distractors)}")

    mcq = MCQ(
        id=mcq_id if mcq_id is not None else derive_mcq_id(req),
        stem=str(payload["stem"]).strip(),
        key=str(payload["key"]).strip(),
        distractors=tuple(str(d).strip() for d in distractors),
        bloom_level=req.bloom_level,
        grade_band=req.grade_band,
        learning_objective=req.learning_objective,
        scenario=req.scenario,
        status=McqStatus.DRAFT,
        revision=revision,
        provenance=provenance,
    )
    violations = validate_mcq(mcq)
    if violations:
        duplicate = [v for v in violations if v.code in ("duplicate_of_key", "duplicate_distractor")]
        if duplicate:
            raise DuplicateOptionsError("; ".join(v.message for v in duplicate))
        raise GenerationOutputError("; ".join(f"{v.field}: {v.message}" for v in violations))
    return mcq


def generate_draft(
    gateway: Gateway,
    req: GenerationRequest,
    mcq_id: str,
    model: str,
    temperature: float = DEFAULT_GENERATION_TEMPERATURE,
    max_attempts: int = 3,
) -> tuple[MCQ, int]:
    """First draft via the gateway; returns the MCQ and attempts used."""
    creq = build_generation_prompt(req, model=model, temperature=temperature, max_attempts=max_attempts)
    result = gateway.complete_structured(creq, extra_validator=semantic_mcq_validator(req))
    provenance = {"model": model, "prompt_version": GENERATE_PROMPT_ID, "fingerprint": result.fingerprint}
    return (
        parse_generation_output(result.payload, req, mcq_id=mcq_id, revision=0, provenance=provenance),
        result.attempts,
    )


def revise_draft(
    gateway: Gateway,
    mcq: MCQ,
    directives: RevisionDirectives,
    req: GenerationRequest,
    model: str,
    temperature: float = DEFAULT_GENERATION_TEMPERATURE,
    max_attempts: int = 3,
) -> tuple[MCQ, int]:
    """Revision via the gateway; keeps the question id, bumps revision."""
    creq = build_revision_prompt(mcq, directives, req, model=model, temperature=temperature, max_attempts=max_attempts)
    result = gateway.complete_structured(creq, extra_validator=semantic_mcq_validator(req))
    provenance = {"model": model, "prompt_version": REVISE_PROMPT_ID, "fingerprint": result.fingerprint}
    return (
        parse_generation_output(
            result.payload, req, mcq_id=mcq.id, revision=mcq.revision + 1, provenance=provenance
        ),
        result.attempts,
    )
