"""Item-writing-flaw critic: a deterministic rule engine over MCQs, plus an
optional LLM probe for the three flaws that need semantic judgment.

The deterministic catalogue reconstructs the item-writing guidelines
commonly used for assessment review (longest-option cue, all/none of the
above, absolute terms, clang associations, grammatical cues, and so on).
Thresholds and lexicons are configurable; the defaults, documented in the
README, are this project's own choices.

A rule subtlety worth knowing: "all of the above" / "none of the above"
style options are *meta options*. They are flagged by their own
categories and excluded from the content-statistics rules (option length,
clang association, grammatical cue, term lexicons, true/false shape),
because a meta option's wording carries no distractor-quality signal.
This also keeps flaw counts monotone when such an option is added.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from statistics import mean

from .core import MCQ, normalize_text
from .gateway import CompletionRequest, Gateway, register_schema
from .generator import render_question_block

IWF_PROBE_PROMPT_ID = "iwf_probe.v1"
IWF_PROBE_SCHEMA_ID = "iwf_probe.v1"


class FlawCategory(str, enum.Enum):
    # Deterministic rules
    LONGEST_OPTION_CORRECT = "LongestOptionCorrect"
    ALL_OF_THE_ABOVE = "AllOfTheAbove"
    NONE_OF_THE_ABOVE = "NoneOfTheAbove"
    ABSOLUTE_TERMS = "AbsoluteTerms"
    VAGUE_FREQUENCY_TERMS = "VagueFrequencyTerms"
    UNEMPHASIZED_NEGATION = "UnemphasizedNegation"
    TRUE_FALSE_OPTIONS = "TrueFalseOptions"
    COMPLEX_K_TYPE = "ComplexKType"
    CLANG_ASSOCIATION = "ClangAssociation"
    GRAMMATICAL_CUE = "GrammaticalCue"
    FILL_IN_THE_BLANK = "FillInTheBlank"
    UNFOCUSED_STEM = "UnfocusedStem"
    GRATUITOUS_STEM = "GratuitousStem"
    DUPLICATE_OPTIONS = "DuplicateOptions"
    # LLM-assisted probes
    IMPLAUSIBLE_DISTRACTOR = "ImplausibleDistractor"
    MULTIPLE_CORRECT = "MultipleCorrect"
    AMBIGUOUS_INFORMATION = "AmbiguousInformation"


LLM_CATEGORIES = (
    FlawCategory.IMPLAUSIBLE_DISTRACTOR,
    FlawCategory.MULTIPLE_CORRECT,
    FlawCategory.AMBIGUOUS_INFORMATION,
)
DETERMINISTIC_CATEGORIES = tuple(c for c in FlawCategory if c not in LLM_CATEGORIES)


@dataclass(frozen=True)
class Flag:
    category: FlawCategory
    evidence: str


@dataclass(frozen=True)
class IwfReport:
    flags: tuple[Flag, ...]
    llm_probe_used: bool = False

    @property
    def flaw_count(self) -> int:
        """Distinct flagged categories; one flaw type repeated is one flaw."""
        return len({f.category for f in self.flags})

    @property
    def categories(self) -> set[FlawCategory]:
        return {f.category for f in self.flags}


@lru_cache(maxsize=1)
def _default_lexicons() -> dict:
    raw = resources.files("mcqforge").joinpath("data/lexicons.json").read_text(encoding="utf-8")
    return json.loads(raw)


@dataclass(frozen=True)
class IwfConfig:
    """Thresholds and lexicons steering the deterministic rules."""

    longest_option_ratio: float = 1.5
    unfocused_stem_min_words: int = 5
    gratuitous_stem_max_words: int = 60
    clang_min_word_len: int = 4
    absolute_terms: frozenset[str] = field(default_factory=lambda: frozenset(_default_lexicons()["absolute_terms"]))
    vague_frequency_terms: frozenset[str] = field(
        default_factory=lambda: frozenset(_default_lexicons()["vague_frequency_terms"])
    )
    negation_keywords: frozenset[str] = field(
        default_factory=lambda: frozenset(_default_lexicons()["negation_keywords"])
    )
    aota_aliases: frozenset[str] = field(
        default_factory=lambda: frozenset(_default_lexicons()["all_of_the_above_aliases"])
    )
    nota_aliases: frozenset[str] = field(
        default_factory=lambda: frozenset(_default_lexicons()["none_of_the_above_aliases"])
    )
    stopwords: frozenset[str] = field(default_factory=lambda: frozenset(_default_lexicons()["stopwords"]))


_WORD_RE = re.compile(r"[a-z]+")
_BLANK_RE = re.compile(r"_{2,}")
_K_TYPE_PATTERNS = [
    re.compile(r"\b[a-d] (?:and|or) [a-d]\b"),
    re.compile(r"\bboth [a-d] and [a-d]\b"),
    re.compile(r"\bneither [a-d] nor [a-d]\b"),
    re.compile(r"\bboth of the above\b"),
    re.compile(r"\bboth (?:answers|options)\b"),
    re.compile(r"\boptions? [a-d] and [a-d]\b"),
    re.compile(r"\b(?:first|second|third) and (?:second|third|fourth)\b"),
]
_VOWELS = "aeiou"


def _tokens(text: str) -> list[str]:
    return _WORD_RE.findall(normalize_text(text))


def _is_meta(option_norm: str, config: IwfConfig) -> bool:
    return option_norm in config.aota_aliases or option_norm in config.nota_aliases


def lint(mcq: MCQ, config: IwfConfig | None = None) -> IwfReport:
    """Run every deterministic rule. Pure: identical input, identical report,
    on every run and platform. Evidence strings quote the triggering text.
    """
    cfg = config or IwfConfig()
    flags: list[Flag] = []

    options = list(mcq.options)
    norm_options = [normalize_text(o) for o in options]
    key_norm = norm_options[0]
    key_is_meta = _is_meta(key_norm, cfg)
    content_distractors = [
        (d, n) for d, n in zip(options[1:], norm_options[1:]) if not _is_meta(n, cfg)
    ]
    content_options = ([] if key_is_meta else [(mcq.key, key_norm)]) + content_distractors

    stem_norm = normalize_text(mcq.stem)
    stem_words = stem_norm.split() if stem_norm else []
    stem_tokens = set(_tokens(mcq.stem))

    # LongestOptionCorrect: key runs long against the mean content distractor.
    if not key_is_meta and content_distractors:
        mean_len = mean(len(n) for _, n in content_distractors)
        if len(key_norm) > cfg.longest_option_ratio * mean_len:
            flags.append(
                Flag(
                    FlawCategory.LONGEST_OPTION_CORRECT,
                    f'key "{mcq.key}" is {len(key_norm)} chars vs mean distractor length {mean_len:.1f}',
                )
            )

    # AllOfTheAbove / NoneOfTheAbove
    for option, n in zip(options, norm_options):
        if n in cfg.aota_aliases:
            flags.append(Flag(FlawCategory.ALL_OF_THE_ABOVE, f'option "{option}"'))
        if n in cfg.nota_aliases:
            flags.append(Flag(FlawCategory.NONE_OF_THE_ABOVE, f'option "{option}"'))

    # Lexicon scans over content options.
    for option, n in content_options:
        words = set(_WORD_RE.findall(n))
        for term in sorted(words & cfg.absolute_terms):
            flags.append(Flag(FlawCategory.ABSOLUTE_TERMS, f'"{term}" in option "{option}"'))
        for term in sorted(words & cfg.vague_frequency_terms):
            flags.append(Flag(FlawCategory.VAGUE_FREQUENCY_TERMS, f'"{term}" in option "{option}"'))

    # UnemphasizedNegation: a negation keyword in the stem must be emphasized
    # (ALL CAPS or *marked*/_marked_) to pass.
    for keyword in sorted(cfg.negation_keywords):
        for match in re.finditer(rf"\b{keyword}\b", mcq.stem, flags=re.IGNORECASE):
            word = match.group(0)
            before = mcq.stem[max(0, match.start() - 1) : match.start()]
            after = mcq.stem[match.end() : match.end() + 1]
            emphasized = word.isupper() or (before == "*" and after == "*") or (before == "_" and after == "_")
            if not emphasized:
                flags.append(Flag(FlawCategory.UNEMPHASIZED_NEGATION, f'unemphasized "{word}" in stem'))

    # TrueFalseOptions: the content options are just a true/false choice.
    if len(content_options) >= 2 and all(n in ("true", "false") for _, n in content_options):
        flags.append(Flag(FlawCategory.TRUE_FALSE_OPTIONS, "options reduce to a true/false choice"))

    # ComplexKType: option text referring to combinations of other options.
    for option, n in content_options:
        if any(p.search(n) for p in _K_TYPE_PATTERNS):
            flags.append(Flag(FlawCategory.COMPLEX_K_TYPE, f'option "{option}" combines other options'))

    # ClangAssociation: a substantive stem word echoed by the key alone.
    if not key_is_meta:
        key_tokens = set(_tokens(mcq.key))
        distractor_tokens: set[str] = set()
        for _, n in content_distractors:
            distractor_tokens |= set(_WORD_RE.findall(n))
        for word in sorted(stem_tokens):
            if len(word) < cfg.clang_min_word_len or word in cfg.stopwords:
                continue
            if word in key_tokens and word not in distractor_tokens:
                flags.append(
                    Flag(FlawCategory.CLANG_ASSOCIATION, f'"{word}" appears in the stem and only in the key')
                )

    # GrammaticalCue: stem ends in an article that fits the key but not
    # every distractor (vowel-onset heuristic).
    if stem_words and stem_words[-1] in ("a", "an") and not key_is_meta:
        article = stem_words[-1]

        def fits(norm_option: str) -> bool:
            first = norm_option[:1]
            return (article == "an") == (first in _VOWELS)

        if fits(key_norm):
            for d, n in content_distractors:
                if not fits(n):
                    flags.append(
                        Flag(
                            FlawCategory.GRAMMATICAL_CUE,
                            f'stem ends with "{article}" which fits the key but not "{d}"',
                        )
                    )

    # FillInTheBlank: interior blank in the stem.
    blank = _BLANK_RE.search(mcq.stem)
    if blank:
        flags.append(Flag(FlawCategory.FILL_IN_THE_BLANK, f'blank "{blank.group(0)}" in stem'))

    # Stem length rules.
    if len(stem_words) < cfg.unfocused_stem_min_words:
        flags.append(Flag(FlawCategory.UNFOCUSED_STEM, f"stem has only {len(stem_words)} words"))
    if len(stem_words) > cfg.gratuitous_stem_max_words:
        flags.append(Flag(FlawCategory.GRATUITOUS_STEM, f"stem has {len(stem_words)} words"))

    # DuplicateOptions (normalization-level duplicates, key included).
    seen: dict[str, str] = {}
    for option, n in zip(options, norm_options):
        if n in seen:
            flags.append(Flag(FlawCategory.DUPLICATE_OPTIONS, f'"{seen[n]}" duplicates "{option}"'))
        else:
            seen[n] = option

    return IwfReport(flags=tuple(flags), llm_probe_used=False)


def _probe_schema(payload: dict) -> list[str]:
    problems = []
    for key in ("implausible_distractor", "multiple_correct", "ambiguous_information"):
        entry = payload.get(key)
        if not isinstance(entry, dict) or entry.get("verdict") not in ("yes", "no"):
            problems.append(f"field {key!r} must be an object with verdict yes/no")
        elif entry["verdict"] == "yes" and not str(entry.get("justification", "")).strip():
            problems.append(f"{key}: a yes verdict needs a justification")
    return problems


register_schema(IWF_PROBE_SCHEMA_ID, _probe_schema)

_PROBE_FIELD_TO_CATEGORY = {
    "implausible_distractor": FlawCategory.IMPLAUSIBLE_DISTRACTOR,
    "multiple_correct": FlawCategory.MULTIPLE_CORRECT,
    "ambiguous_information": FlawCategory.AMBIGUOUS_INFORMATION,
}


def build_probe_prompt(mcq: MCQ, model: str, max_attempts: int = 3) -> CompletionRequest:
    template = resources.files("mcqforge").joinpath(f"prompts/{IWF_PROBE_PROMPT_ID}.txt").read_text(encoding="utf-8")
    rendered = template.format(question_text=render_question_block(mcq), key=mcq.key)
    return CompletionRequest(
        prompt_id=IWF_PROBE_PROMPT_ID,
        rendered_prompt=rendered,
        schema_id=IWF_PROBE_SCHEMA_ID,
        model=model,
        temperature=0.0,
        max_attempts=max_attempts,
    )


def llm_flaw_probe(gateway: Gateway, mcq: MCQ, model: str) -> list[Flag]:
    """Ask the model for yes/no verdicts on the three semantic flaw checks."""
    result = gateway.complete_structured(build_probe_prompt(mcq, model))
    flags = []
    for field_name, category in _PROBE_FIELD_TO_CATEGORY.items():
        entry = result.payload[field_name]
        if entry["verdict"] == "yes":
            flags.append(Flag(category, str(entry.get("justification", "")).strip() or "probe verdict yes"))
    return flags


def run_iwf_critique(
    mcq: MCQ,
    config: IwfConfig | None = None,
    gateway: Gateway | None = None,
    use_probe: bool = False,
    model: str = "",
) -> IwfReport:
    """Deterministic lint, optionally merged with the LLM probe flags."""
    report = lint(mcq, config)
    if not use_probe:
        return report
    if gateway is None:
        raise ValueError("use_probe requires a gateway")
    probe_flags = llm_flaw_probe(gateway, mcq, model)
    return IwfReport(flags=report.flags + tuple(probe_flags), llm_probe_used=True)


def is_acceptable(report: IwfReport, max_flaws: int = 1) -> bool:
    """A question with at most ``max_flaws`` distinct flaws is acceptable."""
    return report.flaw_count <= max_flaws
