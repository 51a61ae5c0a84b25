"""Core domain types for multiple-choice questions.

Defines the MCQ value object (stem, key, distractors plus pedagogical
metadata), the request type that steers generation, and the canonical
JSON serialization used by every bank file.

Design notes:
- The canonical MCQ never encodes which letter the key sits at; the
  presentation shuffle lives in a separate DisplayOrder permutation so
  exported quizzes carry no positional cues.
- Validation is data, not exceptions: ``validate_mcq`` reports violations
  so callers can decide whether to reject, repair, or just lint.
- Text comparisons run on ``normalize_text`` output; stored text is never
  rewritten.
"""

from __future__ import annotations

import enum
import hashlib
import json
import random
import re
from dataclasses import dataclass, field, replace

__all__ = [
    "BloomLevel",
    "GradeBand",
    "GenerationRequest",
    "MCQ",
    "McqStatus",
    "Violation",
    "UnknownBloomLabelError",
    "normalize_text",
    "parse_bloom",
    "validate_mcq",
    "mcq_to_dict",
    "mcq_from_dict",
    "mcq_to_json",
    "mcq_from_json",
    "make_display_order",
    "validate_display_order",
    "option_letters",
    "ordered_options",
    "derive_mcq_id",
]


class UnknownBloomLabelError(ValueError):
    """Raised when a Bloom level label cannot be resolved."""


class BloomLevel(enum.IntEnum):
    """The six cognitive levels of the revised taxonomy, lowest first."""

    REMEMBER = 1
    UNDERSTAND = 2
    APPLY = 3
    ANALYZE = 4
    EVALUATE = 5
    CREATE = 6

    @property
    def label(self) -> str:
        return self.name.capitalize()


# Pre-revision taxonomy names map onto the revised levels.
_BLOOM_SYNONYMS = {
    "remember": BloomLevel.REMEMBER,
    "knowledge": BloomLevel.REMEMBER,
    "understand": BloomLevel.UNDERSTAND,
    "comprehension": BloomLevel.UNDERSTAND,
    "apply": BloomLevel.APPLY,
    "application": BloomLevel.APPLY,
    "analyze": BloomLevel.ANALYZE,
    "analyse": BloomLevel.ANALYZE,
    "analysis": BloomLevel.ANALYZE,
    "evaluate": BloomLevel.EVALUATE,
    "evaluation": BloomLevel.EVALUATE,
    "create": BloomLevel.CREATE,
    "synthesis": BloomLevel.CREATE,
}


def parse_bloom(label: str) -> BloomLevel:
    """Resolve a Bloom level from its canonical name or a common synonym.

    Matching is case-insensitive. Raises UnknownBloomLabelError naming the
    input when no mapping exists.
    """
    key = label.strip().lower()
    try:
        return _BLOOM_SYNONYMS[key]
    except KeyError:
        raise UnknownBloomLabelError(f"unknown Bloom level label: {label!r}") from None


class McqStatus(str, enum.Enum):
    DRAFT = "draft"
    APPROVED = "approved"
    NEEDS_HUMAN_REVIEW = "needs_human_review"


_WS_RE = re.compile(r"\s+")
_TERMINAL_PUNCT = " .!?,;:"


def normalize_text(s: str) -> str:
    """Canonicalize text for comparisons: lowercase, collapse whitespace,
    trim, and strip terminal punctuation. Idempotent; storage never uses it.
    """
    out = _WS_RE.sub(" ", s.lower()).strip()
    return out.rstrip(_TERMINAL_PUNCT)


@dataclass(frozen=True)
class GradeBand:
    """Inclusive school-grade range a question targets, e.g. 7-9."""

    low: int
    high: int

    def __post_init__(self) -> None:
        if not (1 <= self.low <= self.high <= 12):
            raise ValueError(f"grade band must satisfy 1 <= low <= high <= 12, got {self.low}-{self.high}")

    @classmethod
    def parse(cls, text: str) -> "GradeBand":
        """Parse forms like '7-9', 'K7-9', or a single grade '8'."""
        cleaned = text.strip().lower().removeprefix("k")
        if "-" in cleaned:
            lo, _, hi = cleaned.partition("-")
            return cls(int(lo), int(hi.lstrip("k")))
        grade = int(cleaned)
        return cls(grade, grade)

    def __str__(self) -> str:
        return f"{self.low}-{self.high}"


@dataclass(frozen=True)
class GenerationRequest:
    """User inputs that steer one generated question."""

    learning_objective: str
    bloom_level: BloomLevel
    grade_band: GradeBand
    scenario: str | None = None
    option_count: int = 4

    def __post_init__(self) -> None:
        if not self.learning_objective.strip():
            raise ValueError("learning_objective must be nonempty")
        if self.option_count < 3:
            raise ValueError(f"option_count must be >= 3, got {self.option_count}")

    def to_dict(self) -> dict:
        return {
            "learning_objective": self.learning_objective,
            "bloom_level": self.bloom_level.label,
            "grade_band": {"low": self.grade_band.low, "high": self.grade_band.high},
            "scenario": self.scenario,
            "option_count": self.option_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GenerationRequest":
        band = data["grade_band"]
        return cls(
            learning_objective=data["learning_objective"],
            bloom_level=parse_bloom(data["bloom_level"]),
            grade_band=GradeBand(int(band["low"]), int(band["high"])),
            scenario=data.get("scenario"),
            option_count=int(data.get("option_count", 4)),
        )


@dataclass(frozen=True)
class MCQ:
    """One multiple-choice question.

    ``key`` is the single correct option; ``distractors`` are the incorrect
    ones in canonical (not presentation) order. ``revision`` counts completed
    revision cycles; a first draft is 0.
    """

    id: str
    stem: str
    key: str
    distractors: tuple[str, ...]
    bloom_level: BloomLevel
    grade_band: GradeBand
    learning_objective: str
    scenario: str | None = None
    status: McqStatus = McqStatus.DRAFT
    revision: int = 0
    provenance: dict | None = None

    @property
    def options(self) -> tuple[str, ...]:
        """All options in canonical order: key first, then distractors."""
        return (self.key, *self.distractors)

    def with_status(self, status: McqStatus) -> "MCQ":
        return replace(self, status=status)


@dataclass(frozen=True)
class Violation:
    """One broken MCQ invariant, naming the offending field."""

    field: str
    code: str
    message: str


def validate_mcq(mcq: MCQ) -> list[Violation]:
    """Check every MCQ invariant; an empty list means the question is valid.

    Pure: the same input always yields the same violations.
    """
    violations: list[Violation] = []
    if not normalize_text(mcq.stem):
        violations.append(Violation("stem", "empty_stem", "empty stem"))
    if not normalize_text(mcq.key):
        violations.append(Violation("key", "empty_key", "empty key"))
    if not mcq.distractors:
        violations.append(Violation("distractors", "no_distractors", "distractors must be nonempty"))

    key_norm = normalize_text(mcq.key)
    seen: dict[str, int] = {}
    for i, d in enumerate(mcq.distractors):
        d_norm = normalize_text(d)
        if not d_norm:
            violations.append(Violation(f"distractors[{i}]", "empty_distractor", "empty distractor"))
            continue
        if d_norm == key_norm:
            violations.append(Violation(f"distractors[{i}]", "duplicate_of_key", f"duplicate of key: {d!r}"))
        if d_norm in seen:
            violations.append(
                Violation(
                    f"distractors[{i}]",
                    "duplicate_distractor",
                    f"duplicate of distractor {seen[d_norm]}: {d!r}",
                )
            )
        else:
            seen[d_norm] = i

    if mcq.revision < 0:
        violations.append(Violation("revision", "negative_revision", "revision must be >= 0"))
    return violations


# Canonical serialization: fixed field order, compact separators, UTF-8
# passthrough. serialize -> parse -> serialize is byte-identical.

def mcq_to_dict(mcq: MCQ) -> dict:
    return {
        "id": mcq.id,
        "stem": mcq.stem,
        "key": mcq.key,
        "distractors": list(mcq.distractors),
        "bloom_level": mcq.bloom_level.label,
        "grade_band": {"low": mcq.grade_band.low, "high": mcq.grade_band.high},
        "learning_objective": mcq.learning_objective,
        "scenario": mcq.scenario,
        "status": mcq.status.value,
        "revision": mcq.revision,
        "provenance": mcq.provenance,
    }


def mcq_from_dict(data: dict) -> MCQ:
    band = data["grade_band"]
    return MCQ(
        id=data["id"],
        stem=data["stem"],
        key=data["key"],
        distractors=tuple(data["distractors"]),
        bloom_level=parse_bloom(data["bloom_level"]),
        grade_band=GradeBand(int(band["low"]), int(band["high"])),
        learning_objective=data["learning_objective"],
        scenario=data.get("scenario"),
        status=McqStatus(data.get("status", "draft")),
        revision=int(data.get("revision", 0)),
        provenance=data.get("provenance"),
    )


def mcq_to_json(mcq: MCQ) -> str:
    return json.dumps(mcq_to_dict(mcq), ensure_ascii=False, separators=(",", ":"))


def mcq_from_json(text: str) -> MCQ:
    return mcq_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Display order

def option_letters(n: int) -> list[str]:
    return [chr(ord("A") + i) for i in range(n)]


def make_display_order(mcq: MCQ, seed: int) -> tuple[int, ...]:
    """Seeded presentation shuffle: letter position i shows canonical option
    ``perm[i]`` (0 is the key). Deterministic per (seed, question id).
    """
    rng = random.Random(f"{seed}:{mcq.id}")
    perm = list(range(len(mcq.options)))
    rng.shuffle(perm)
    return tuple(perm)


def validate_display_order(order: tuple[int, ...], option_count: int) -> None:
    if sorted(order) != list(range(option_count)):
        raise ValueError(f"display_order {order!r} is not a permutation of 0..{option_count - 1}")


def ordered_options(mcq: MCQ, order: tuple[int, ...]) -> list[tuple[str, str, bool]]:
    """Options as presented: (letter, text, is_key) per display position."""
    validate_display_order(order, len(mcq.options))
    letters = option_letters(len(mcq.options))
    opts = mcq.options
    return [(letters[i], opts[pos], pos == 0) for i, pos in enumerate(order)]


def derive_mcq_id(req: GenerationRequest, seq: int = 0) -> str:
    """Stable question id derived from the request, so replayed runs agree."""
    blob = "|".join(
        [
            req.learning_objective,
            req.bloom_level.label,
            str(req.grade_band),
            req.scenario or "",
            str(req.option_count),
            str(seq),
        ]
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]
