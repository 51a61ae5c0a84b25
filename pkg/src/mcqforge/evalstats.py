"""Rubric evaluation harness: ratings ingestion and multi-rater statistics.

A rating is one expert's pass over one question: the answer they believe
correct plus a ten-item rubric response. This module loads and validates
rating files, then computes the report consumed by both the CLI and the
review service:

- per-criterion response distributions per rater, and cross-rater means
  of each criterion's "positive" rate (percent yes; for the would-you-use-it
  item, percent of this/rephrased/both, i.e. usable as-is or after rewording);
- per-rater key agreement (how often the rater's chosen answer matches the
  bank's key);
- pairwise percent agreement per criterion, plus Fleiss' kappa as an
  optional chance-corrected figure.

All internal values are full precision; rounding (half-up, one decimal)
happens only at rendering.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from .core import MCQ, normalize_text

logger = logging.getLogger(__name__)

YES_NO = ("yes", "no")
USABLE_RESPONSES = frozenset({"this", "rephrased", "both"})


class RubricItem(str, enum.Enum):
    UNDERSTANDABLE = "Understandable"
    LO_RELATED = "LORelated"
    GRAMMATICAL = "Grammatical"
    CLEAR = "Clear"
    REPHRASE = "Rephrase"
    ANSWERABLE = "Answerable"
    CENTRAL = "Central"
    WOULD_YOU_USE_IT = "WouldYouUseIt"
    BLOOMS_LEVEL = "BloomsLevel"
    GRADE_LEVEL = "GradeLevel"


RESPONSE_OPTIONS: dict[RubricItem, tuple[str, ...]] = {
    RubricItem.UNDERSTANDABLE: YES_NO,
    RubricItem.LO_RELATED: YES_NO,
    RubricItem.GRAMMATICAL: YES_NO,
    RubricItem.CLEAR: ("yes", "more_or_less", "no"),
    RubricItem.REPHRASE: YES_NO,
    RubricItem.ANSWERABLE: YES_NO,
    RubricItem.CENTRAL: YES_NO,
    RubricItem.WOULD_YOU_USE_IT: ("this", "rephrased", "both", "neither"),
    RubricItem.BLOOMS_LEVEL: YES_NO,
    RubricItem.GRADE_LEVEL: YES_NO,
}

RUBRIC_PROMPTS: dict[RubricItem, str] = {
    RubricItem.UNDERSTANDABLE: "Could you understand what the question is asking?",
    RubricItem.LO_RELATED: "Is the question related to the learning objective?",
    RubricItem.GRAMMATICAL: "Is the question grammatically well-formed?",
    RubricItem.CLEAR: "Is it clear what the question asks for?",
    RubricItem.REPHRASE: "Could you rephrase the question to make it clearer and error-free?",
    RubricItem.ANSWERABLE: "Can students answer the question with the information or context provided within?",
    RubricItem.CENTRAL: "Do you think being able to answer the question is important to work on the topic given?",
    RubricItem.WOULD_YOU_USE_IT: (
        "If you were a teacher teaching the course topic, would you use this question "
        "or the rephrased version in the course?"
    ),
    RubricItem.BLOOMS_LEVEL: "Do you think the question is of the Bloom's taxonomy level labeled?",
    RubricItem.GRADE_LEVEL: "Do you think the question is appropriate for the target grade band?",
}


def rubric_schema() -> list[dict]:
    """The ten rubric items with their prompts and closed response sets."""
    return [
        {"id": item.value, "prompt": RUBRIC_PROMPTS[item], "responses": list(RESPONSE_OPTIONS[item])}
        for item in RubricItem
    ]


class RatingValidationError(ValueError):
    pass


class UnknownQuestionError(KeyError):
    pass


class InsufficientRatersError(ValueError):
    pass


@dataclass(frozen=True)
class Rating:
    """One rater's complete rubric pass over one question."""

    rater_id: str
    question_id: str
    responses: dict[RubricItem, str]
    chosen_answer: str
    timestamp: str = ""

    def validate(self) -> None:
        missing = [item.value for item in RubricItem if item not in self.responses]
        if missing:
            raise RatingValidationError(f"missing rubric responses: {', '.join(missing)}")
        for item, response in self.responses.items():
            allowed = RESPONSE_OPTIONS[item]
            if response not in allowed:
                raise RatingValidationError(
                    f"{item.value}: response {response!r} not in closed set {list(allowed)}"
                )
        if not self.rater_id.strip() or not self.question_id.strip():
            raise RatingValidationError("rater_id and question_id must be nonempty")
        if not self.chosen_answer.strip():
            raise RatingValidationError("chosen_answer must be nonempty")

    def to_dict(self) -> dict:
        return {
            "rater_id": self.rater_id,
            "question_id": self.question_id,
            "responses": {item.value: self.responses[item] for item in RubricItem},
            "chosen_answer": self.chosen_answer,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Rating":
        try:
            raw_responses = data["responses"]
        except KeyError:
            raise RatingValidationError("missing 'responses' object") from None
        responses: dict[RubricItem, str] = {}
        for key, value in raw_responses.items():
            try:
                item = RubricItem(key)
            except ValueError:
                raise RatingValidationError(f"unknown rubric item {key!r}") from None
            responses[item] = value
        rating = cls(
            rater_id=str(data.get("rater_id", "")),
            question_id=str(data.get("question_id", "")),
            responses=responses,
            chosen_answer=str(data.get("chosen_answer", "")),
            timestamp=str(data.get("timestamp", "")),
        )
        rating.validate()
        return rating


@dataclass(frozen=True)
class RatingSet:
    ratings: tuple[Rating, ...]

    def raters(self) -> list[str]:
        return sorted({r.rater_id for r in self.ratings})

    def by_rater(self, rater_id: str) -> list[Rating]:
        return [r for r in self.ratings if r.rater_id == rater_id]

    def question_ids(self) -> list[str]:
        return sorted({r.question_id for r in self.ratings})

    def __len__(self) -> int:
        return len(self.ratings)


_CSV_FIXED_COLUMNS = ["rater_id", "question_id", "chosen_answer", "timestamp"]


def load_ratings(path: str | Path) -> RatingSet:
    """Load and validate ratings from JSONL (or CSV when the file ends in
    .csv). Errors carry the offending line number. Duplicate (rater,
    question) pairs keep the last occurrence, matching the append-only
    overwrite discipline of the ratings store.
    """
    path = Path(path)
    loaded: dict[tuple[str, str], Rating] = {}
    count = 0
    if path.suffix.lower() == ".csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for line_no, row in enumerate(reader, start=2):
                try:
                    responses = {item.value: (row.get(item.value) or "") for item in RubricItem}
                    rating = Rating.from_dict(
                        {
                            "rater_id": row.get("rater_id", ""),
                            "question_id": row.get("question_id", ""),
                            "chosen_answer": row.get("chosen_answer", ""),
                            "timestamp": row.get("timestamp", ""),
                            "responses": responses,
                        }
                    )
                except RatingValidationError as exc:
                    raise RatingValidationError(f"{path}:{line_no}: {exc}") from None
                loaded[(rating.rater_id, rating.question_id)] = rating
                count += 1
    else:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rating = Rating.from_dict(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise RatingValidationError(f"{path}:{line_no}: invalid JSON ({exc})") from None
                except RatingValidationError as exc:
                    raise RatingValidationError(f"{path}:{line_no}: {exc}") from None
                loaded[(rating.rater_id, rating.question_id)] = rating
                count += 1

    if count == 0:
        logger.warning("no ratings found in %s", path)
    if len(loaded) < count:
        logger.warning("%d duplicate (rater, question) ratings superseded in %s", count - len(loaded), path)
    return RatingSet(ratings=tuple(loaded.values()))


def save_ratings(path: str | Path, ratings: RatingSet) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rating in ratings.ratings:
            fh.write(json.dumps(rating.to_dict(), ensure_ascii=False, separators=(",", ":")) + "\n")


# ---------------------------------------------------------------------------
# Statistics

def key_agreement(ratings: RatingSet, bank: dict[str, MCQ]) -> dict[str, float]:
    """Per rater: percent of rated questions whose chosen answer matches the
    bank's key (compared after text normalization)."""
    result: dict[str, float] = {}
    for rater in ratings.raters():
        rated = ratings.by_rater(rater)
        matches = 0
        for rating in rated:
            try:
                mcq = bank[rating.question_id]
            except KeyError:
                raise UnknownQuestionError(f"rated question {rating.question_id!r} not in bank") from None
            if normalize_text(rating.chosen_answer) == normalize_text(mcq.key):
                matches += 1
        result[rater] = 100.0 * matches / len(rated)
    return result


def positive_responses(item: RubricItem) -> frozenset[str]:
    if item is RubricItem.WOULD_YOU_USE_IT:
        return USABLE_RESPONSES
    return frozenset({"yes"})


@dataclass(frozen=True)
class CriterionStats:
    distribution: dict[str, dict[str, float]]  # rater -> response -> percent
    summary_per_rater: dict[str, float]  # rater -> positive-rate percent
    summary_mean: float


def criterion_stats(ratings: RatingSet) -> dict[RubricItem, CriterionStats]:
    """Full response distributions plus the positive-rate summary per item."""
    out: dict[RubricItem, CriterionStats] = {}
    raters = ratings.raters()
    for item in RubricItem:
        distribution: dict[str, dict[str, float]] = {}
        summary: dict[str, float] = {}
        for rater in raters:
            rated = ratings.by_rater(rater)
            denom = len(rated)
            counts = {resp: 0 for resp in RESPONSE_OPTIONS[item]}
            for rating in rated:
                counts[rating.responses[item]] += 1
            distribution[rater] = {resp: 100.0 * n / denom for resp, n in counts.items()}
            positive = positive_responses(item)
            summary[rater] = sum(pct for resp, pct in distribution[rater].items() if resp in positive)
        mean = sum(summary.values()) / len(summary) if summary else 0.0
        out[item] = CriterionStats(distribution=distribution, summary_per_rater=summary, summary_mean=mean)
    return out


def pairwise_agreement(ratings: RatingSet, item: RubricItem) -> dict[tuple[str, str], float]:
    """Percent of co-rated questions on which each rater pair gave the same
    response to ``item``."""
    raters = ratings.raters()
    if len(raters) < 2:
        raise InsufficientRatersError("pairwise agreement needs at least 2 raters")
    by_rater = {
        rater: {r.question_id: r.responses[item] for r in ratings.by_rater(rater)} for rater in raters
    }
    out: dict[tuple[str, str], float] = {}
    for i, r1 in enumerate(raters):
        for r2 in raters[i + 1 :]:
            shared = sorted(by_rater[r1].keys() & by_rater[r2].keys())
            if not shared:
                continue
            same = sum(1 for q in shared if by_rater[r1][q] == by_rater[r2][q])
            out[(r1, r2)] = 100.0 * same / len(shared)
    return out


def fleiss_kappa(ratings: RatingSet, item: RubricItem) -> float | None:
    """Fleiss' kappa over the questions rated by every rater; None when the
    statistic is undefined (fewer than 2 raters, no complete questions, or
    no variation for chance correction)."""
    raters = ratings.raters()
    if len(raters) < 2:
        return None
    by_rater = {
        rater: {r.question_id: r.responses[item] for r in ratings.by_rater(rater)} for rater in raters
    }
    complete = sorted(set.intersection(*(set(m.keys()) for m in by_rater.values())))
    if not complete:
        return None
    categories = list(RESPONSE_OPTIONS[item])
    n = len(raters)
    table = [
        [sum(1 for rater in raters if by_rater[rater][q] == cat) for cat in categories] for q in complete
    ]
    total = n * len(complete)
    p_cat = [sum(row[j] for row in table) / total for j in range(len(categories))]
    p_bar = sum(
        (sum(c * c for c in row) - n) / (n * (n - 1)) for row in table
    ) / len(complete)
    p_e = sum(p * p for p in p_cat)
    if p_e >= 1.0:
        return None
    return (p_bar - p_e) / (1.0 - p_e)


# ---------------------------------------------------------------------------
# Report

@dataclass(frozen=True)
class EvalReport:
    question_counts: dict[str, int]  # rater -> rated question count
    key_agreement: dict[str, float]
    criteria: dict[str, CriterionStats]  # keyed by RubricItem value
    pairwise: dict[str, dict[str, float]]  # item -> "rater1|rater2" -> percent
    fleiss_kappa: dict[str, float | None]
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "question_counts": self.question_counts,
            "key_agreement": self.key_agreement,
            "criteria": {
                name: {
                    "distribution": stats.distribution,
                    "summary_per_rater": stats.summary_per_rater,
                    "summary_mean": stats.summary_mean,
                }
                for name, stats in self.criteria.items()
            },
            "pairwise": self.pairwise,
            "fleiss_kappa": self.fleiss_kappa,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalReport":
        return cls(
            question_counts={k: int(v) for k, v in data["question_counts"].items()},
            key_agreement=data["key_agreement"],
            criteria={
                name: CriterionStats(
                    distribution=entry["distribution"],
                    summary_per_rater=entry["summary_per_rater"],
                    summary_mean=entry["summary_mean"],
                )
                for name, entry in data["criteria"].items()
            },
            pairwise=data["pairwise"],
            fleiss_kappa=data["fleiss_kappa"],
            warnings=tuple(data.get("warnings", [])),
        )


def compute_report(ratings: RatingSet, bank: dict[str, MCQ]) -> EvalReport:
    """Assemble the full report; the single path used by CLI and service."""
    raters = ratings.raters()
    warnings: list[str] = []
    if not ratings.ratings:
        warnings.append("no ratings: all denominators are zero")
        return EvalReport(
            question_counts={},
            key_agreement={},
            criteria={},
            pairwise={},
            fleiss_kappa={},
            warnings=tuple(warnings),
        )

    counts = {rater: len(ratings.by_rater(rater)) for rater in raters}
    criteria = criterion_stats(ratings)
    pairwise: dict[str, dict[str, float]] = {}
    kappas: dict[str, float | None] = {}
    for item in RubricItem:
        if len(raters) >= 2:
            pairs = pairwise_agreement(ratings, item)
            pairwise[item.value] = {f"{a}|{b}": pct for (a, b), pct in sorted(pairs.items())}
        else:
            pairwise[item.value] = {}
        kappas[item.value] = fleiss_kappa(ratings, item)

    return EvalReport(
        question_counts=counts,
        key_agreement=key_agreement(ratings, bank),
        criteria={item.value: criteria[item] for item in RubricItem},
        pairwise=pairwise,
        fleiss_kappa=kappas,
        warnings=tuple(warnings),
    )


def round_half_up(value: float, places: int = 1) -> float:
    """Decimal half-up rounding for display (84.25 -> 84.3)."""
    quantum = Decimal(10) ** -places
    return float(Decimal(str(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def report_to_json(report: EvalReport) -> str:
    """Lossless JSON rendering (full precision; round-trips to an equal report)."""
    return json.dumps(report.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> EvalReport:
    return EvalReport.from_dict(json.loads(text))


def report_to_csv(report: EvalReport) -> str:
    """Human-facing summary table at one decimal (half-up).

    Columns: criterion, one column per rater (positive-response percent),
    then the cross-rater average. The final row is KeyAgreement.
    """
    raters = sorted(report.question_counts.keys())
    lines = [",".join(["criterion", *raters, "average"])]
    if not raters:
        lines.append("# no ratings: denominators are zero")
        return "\n".join(lines) + "\n"
    for name, stats in report.criteria.items():
        row = [name] + [f"{round_half_up(stats.summary_per_rater[r]):.1f}" for r in raters]
        row.append(f"{round_half_up(stats.summary_mean):.1f}")
        lines.append(",".join(row))
    key_values = [report.key_agreement[r] for r in raters]
    key_row = ["KeyAgreement"] + [f"{round_half_up(v):.1f}" for v in key_values]
    key_row.append(f"{round_half_up(sum(key_values) / len(key_values)):.1f}")
    lines.append(",".join(key_row))
    return "\n".join(lines) + "\n"


def render_report(report: EvalReport, fmt: str, path: str | Path) -> None:
    if fmt == "json":
        Path(path).write_text(report_to_json(report), encoding="utf-8")
    elif fmt == "csv":
        Path(path).write_text(report_to_csv(report), encoding="utf-8")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
