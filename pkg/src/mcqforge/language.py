"""Language critic: readability scoring plus grade-band alignment.

The deterministic core is a Flesch-Kincaid grade computed over the stem
and all options (students read all of it), gated at band.high + 1. There
is no lower bound: wording below the band is not flagged, since easy
reading does no harm in an assessment. An optional LLM style review can
add feedback, but it can never pass a question the deterministic gate
failed.

The syllable counter is a fixed heuristic (vowel-group counting with a
silent-e rule); it is approximate by design and the thresholds are coarse
enough to absorb that.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .core import MCQ, GradeBand
from .gateway import CompletionRequest, Gateway, register_schema

LANGUAGE_REVIEW_PROMPT_ID = "language_review.v1"
LANGUAGE_REVIEW_SCHEMA_ID = "language_review.v1"

HIGH_GRADE_SLACK = 1  # pass while fk_grade <= band.high + 1

_VOWELS = set("aeiouy")
_NON_LETTER_RE = re.compile(r"[^a-z]")
_SENTENCE_END_RE = re.compile(r"[.!?]+")
_HAS_LETTER_RE = re.compile(r"[A-Za-z]")

FK_WORDS_PER_SENTENCE_WEIGHT = 0.39
FK_SYLLABLES_PER_WORD_WEIGHT = 11.8
FK_OFFSET = -15.59


class EmptyWordError(ValueError):
    pass


class EmptyTextError(ValueError):
    pass


def count_syllables(word: str) -> int:
    """Heuristic syllable count, minimum 1.

    Counts contiguous vowel-letter runs (a, e, i, o, u, y), then subtracts a
    trailing silent "e" unless the word ends in consonant + "le".
    """
    letters = _NON_LETTER_RE.sub("", word.lower())
    if not letters:
        raise EmptyWordError(f"no letters in word {word!r}")

    runs = 0
    in_run = False
    for ch in letters:
        if ch in _VOWELS:
            if not in_run:
                runs += 1
            in_run = True
        else:
            in_run = False

    if letters.endswith("e"):
        consonant_le = len(letters) >= 3 and letters.endswith("le") and letters[-3] not in _VOWELS
        if not consonant_le:
            runs -= 1
    return max(runs, 1)


def flesch_kincaid_grade(text: str) -> float:
    """0.39 * (words/sentences) + 11.8 * (syllables/words) - 15.59.

    A word is a whitespace token containing at least one letter; a sentence
    is a run of terminal punctuation (. ! ?), minimum 1. May go negative on
    very simple text.
    """
    words = [t for t in text.split() if _HAS_LETTER_RE.search(t)]
    if not words:
        raise EmptyTextError("text contains no words")
    sentences = max(len(_SENTENCE_END_RE.findall(text)), 1)
    syllables = sum(count_syllables(w) for w in words)
    return (
        FK_WORDS_PER_SENTENCE_WEIGHT * (len(words) / sentences)
        + FK_SYLLABLES_PER_WORD_WEIGHT * (syllables / len(words))
        + FK_OFFSET
    )


@dataclass(frozen=True)
class LanguageReport:
    fk_grade: float
    verdict: str  # "pass" or "fail"
    feedback: tuple[str, ...]
    llm_review_used: bool = False


def mcq_reading_text(mcq: MCQ) -> str:
    """Stem plus every option, each terminated as its own sentence."""
    segments = [mcq.stem, *mcq.options]
    closed = [s.strip() if s.strip().endswith((".", "!", "?")) else s.strip() + "." for s in segments]
    return " ".join(closed)


def _review_schema(payload: dict) -> list[str]:
    problems = []
    if payload.get("verdict") not in ("pass", "fail"):
        problems.append("field 'verdict' must be pass or fail")
    feedback = payload.get("feedback")
    if not isinstance(feedback, list) or not all(isinstance(f, str) for f in feedback):
        problems.append("field 'feedback' must be a list of strings")
    return problems


register_schema(LANGUAGE_REVIEW_SCHEMA_ID, _review_schema)


def build_review_prompt(mcq: MCQ, band: GradeBand, model: str, max_attempts: int = 3) -> CompletionRequest:
    template = resources.files("mcqforge").joinpath(
        f"prompts/{LANGUAGE_REVIEW_PROMPT_ID}.txt"
    ).read_text(encoding="utf-8")
    rendered = template.format(grade_low=band.low, grade_high=band.high, question_text=mcq_reading_text(mcq))
    return CompletionRequest(
        prompt_id=LANGUAGE_REVIEW_PROMPT_ID,
        rendered_prompt=rendered,
        schema_id=LANGUAGE_REVIEW_SCHEMA_ID,
        model=model,
        temperature=0.0,
        max_attempts=max_attempts,
    )


def review_language(
    mcq: MCQ,
    band: GradeBand,
    use_llm: bool = False,
    gateway: Gateway | None = None,
    model: str = "",
) -> LanguageReport:
    """Verdict passes only if the readability gate passes and, when enabled,
    the LLM review agrees. A failing report always carries feedback."""
    fk = flesch_kincaid_grade(mcq_reading_text(mcq))
    threshold = band.high + HIGH_GRADE_SLACK
    feedback: list[str] = []
    gate_pass = fk <= threshold
    if not gate_pass:
        feedback.append(
            "reduce sentence length or vocabulary complexity "
            f"(estimated reading grade {fk:.1f} exceeds grade {threshold})"
        )

    llm_used = False
    llm_pass = True
    if use_llm:
        if gateway is None:
            raise ValueError("use_llm requires a gateway")
        result = gateway.complete_structured(build_review_prompt(mcq, band, model))
        llm_used = True
        if result.payload["verdict"] == "fail":
            llm_pass = False
            llm_feedback = [f.strip() for f in result.payload["feedback"] if f.strip()]
            feedback.extend(llm_feedback or ["revise wording for clarity at the target grade band"])

    verdict = "pass" if (gate_pass and llm_pass) else "fail"
    return LanguageReport(fk_grade=fk, verdict=verdict, feedback=tuple(feedback), llm_review_used=llm_used)
