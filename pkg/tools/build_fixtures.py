#!/usr/bin/env python3
"""Regenerate everything under fixtures/.

Runs the real pipeline in record mode against scripted providers, so the
shipped transcripts contain exactly the fingerprints a replay run will
ask for. Also writes the 40-question fixture bank and the 3-expert
ratings file with the agreed per-rater response patterns, then verifies
the resulting statistics before writing.

Usage: python3 tools/build_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from mcqforge.bank import save_bank  # noqa: E402
from mcqforge.config import AppConfig  # noqa: E402
from mcqforge.core import (  # noqa: E402
    MCQ,
    BloomLevel,
    GenerationRequest,
    GradeBand,
    McqStatus,
    make_display_order,
    validate_mcq,
)
from mcqforge.evalstats import Rating, RatingSet, RubricItem, save_ratings  # noqa: E402
from mcqforge.gateway import Gateway  # noqa: E402
from mcqforge.iwf import lint  # noqa: E402
from mcqforge.language import review_language  # noqa: E402
from mcqforge.supervisor import run_batch, run_workflow  # noqa: E402

FIXTURES = ROOT / "fixtures"
SEED = 42
BAND = GradeBand(7, 9)


class ScriptedProvider:
    """Returns predetermined payloads in call order."""

    def __init__(self, payloads: list[dict]):
        self.payloads = [json.dumps(p) for p in payloads]
        self.calls = 0

    def complete(self, req, prompt_override=None):
        payload = self.payloads[self.calls]
        self.calls += 1
        return payload


# ---------------------------------------------------------------------------
# Demo batch: 5 requests, clean first drafts.

DEMO_REQUESTS = [
    GenerationRequest(
        learning_objective="evaluate when AI use helps or harms learning",
        bloom_level=BloomLevel.EVALUATE,
        grade_band=BAND,
        scenario="creative writing",
    ),
    GenerationRequest(
        learning_objective="explain how computers learn patterns from examples",
        bloom_level=BloomLevel.UNDERSTAND,
        grade_band=BAND,
    ),
    GenerationRequest(
        learning_objective="identify what a chatbot can and cannot know",
        bloom_level=BloomLevel.REMEMBER,
        grade_band=BAND,
    ),
    GenerationRequest(
        learning_objective="apply safe habits when sharing data with AI apps",
        bloom_level=BloomLevel.APPLY,
        grade_band=BAND,
        scenario="a homework helper app",
    ),
    GenerationRequest(
        learning_objective="analyze why an image classifier makes mistakes",
        bloom_level=BloomLevel.ANALYZE,
        grade_band=BAND,
    ),
]

DEMO_PAYLOADS = [
    {
        "stem": (
            "Mia wants an AI tool to write her whole short story for class. "
            "Which outcome is the best reason to decide against that plan?"
        ),
        "key": "She would miss the practice of shaping ideas in her own words.",
        "distractors": [
            "The tool would print the story in a font she dislikes.",
            "Her computer would need a longer charging cable.",
            "The story would use too many pages in her notebook.",
        ],
    },
    {
        "stem": (
            "A photo app sorts pictures of cats and dogs after seeing thousands of labeled photos. "
            "What does this show about how computers learn?"
        ),
        "key": "They find patterns in many examples instead of following fixed rules.",
        "distractors": [
            "They copy one photo and reuse it for new animals.",
            "They ask a person to label each new picture first.",
            "They guess randomly until someone corrects them.",
        ],
    },
    {
        "stem": "A chatbot answers questions using text it was trained on. Which fact is it unable to know?",
        "key": "What happened in your classroom five minutes ago.",
        "distractors": [
            "The capital city of a large country.",
            "The plot of a famous old novel.",
            "The rules of a popular board game.",
        ],
    },
    {
        "stem": (
            "A homework helper app asks for your full name, school, and home address before it starts. "
            "What is the safest next step?"
        ),
        "key": "Close the request and check the app's rules with a trusted adult.",
        "distractors": [
            "Type the details quickly so the homework loads faster.",
            "Share a friend's address instead of your own.",
            "Post the question on social media to save time.",
        ],
    },
    {
        "stem": (
            "An image classifier trained mostly on photos of red apples keeps mislabeling green apples as pears. "
            "What best explains the mistake?"
        ),
        "key": "Its training examples did not cover enough apple colors.",
        "distractors": [
            "The camera lens was dirty during testing.",
            "Green fruit cannot be photographed clearly.",
            "The program ran out of memory for new photos.",
        ],
    },
]


def _assert_clean(payload: dict, req: GenerationRequest, label: str) -> None:
    mcq = MCQ(
        id="check",
        stem=payload["stem"],
        key=payload["key"],
        distractors=tuple(payload["distractors"]),
        bloom_level=req.bloom_level,
        grade_band=req.grade_band,
        learning_objective=req.learning_objective,
        scenario=req.scenario,
    )
    violations = validate_mcq(mcq)
    assert not violations, f"{label}: invalid MCQ: {violations}"
    report = lint(mcq)
    assert report.flaw_count == 0, f"{label}: expected 0 flaws, got {[f for f in report.flags]}"
    lang = review_language(mcq, req.grade_band)
    assert lang.verdict == "pass", f"{label}: language gate failed at fk={lang.fk_grade:.2f}"


def build_demo5() -> None:
    (FIXTURES / "transcripts").mkdir(parents=True, exist_ok=True)
    (FIXTURES / "requests").mkdir(parents=True, exist_ok=True)

    for i, (req, payload) in enumerate(zip(DEMO_REQUESTS, DEMO_PAYLOADS)):
        _assert_clean(payload, req, f"demo5[{i}]")

    transcript_path = FIXTURES / "transcripts" / "demo5.jsonl"
    if transcript_path.exists():
        transcript_path.unlink()
    gateway = Gateway(mode="record", transcript_path=transcript_path, provider=ScriptedProvider(DEMO_PAYLOADS))
    config = AppConfig(mode="record", transcript_path=str(transcript_path), workers=1, seed=SEED)
    bank, report = run_batch(gateway, DEMO_REQUESTS, config)
    assert report["summary"]["approved"] == 5, report["summary"]

    with open(FIXTURES / "requests" / "demo5_requests.jsonl", "w", encoding="utf-8") as fh:
        for req in DEMO_REQUESTS:
            fh.write(json.dumps(req.to_dict(), ensure_ascii=False, separators=(",", ":")) + "\n")
    print(f"demo5: {len(gateway.transcript)} transcript entries, 5 approved")


# ---------------------------------------------------------------------------
# Persistent-flaw chain: every draft keeps 2 flaws, budget 3 revisions.

PERSISTENT_REQUEST = GenerationRequest(
    learning_objective="explain what training data is",
    bloom_level=BloomLevel.UNDERSTAND,
    grade_band=BAND,
)


def _flawed_payload(round_no: int) -> dict:
    # AllOfTheAbove + AbsoluteTerms in every round; stems vary so each
    # revision renders a distinct prompt.
    stems = [
        "Training data is the set of examples a computer studies. What does more varied training data do?",
        "Think about the examples a computer studies to learn. What does more varied training data change?",
        "A model studies example data before it makes guesses. What does more varied training data improve?",
        "Consider the examples used to teach a model. What does more varied training data give the model?",
    ]
    return {
        "stem": stems[round_no],
        "key": "It always makes the model perfect at recognizing things.",
        "distractors": [
            "It makes the screen brighter while learning.",
            "It lets the model skip studying examples.",
            "All of the above.",
        ],
    }


def build_persistent_flaws() -> None:
    for i in range(4):
        payload = _flawed_payload(i)
        mcq = MCQ(
            id="check",
            stem=payload["stem"],
            key=payload["key"],
            distractors=tuple(payload["distractors"]),
            bloom_level=PERSISTENT_REQUEST.bloom_level,
            grade_band=BAND,
            learning_objective=PERSISTENT_REQUEST.learning_objective,
        )
        report = lint(mcq)
        assert report.flaw_count == 2, f"round {i}: expected 2 flaws, got {report.categories}"
        lang = review_language(mcq, BAND)
        assert lang.verdict == "pass", f"round {i}: language failed at fk={lang.fk_grade:.2f}"

    transcript_path = FIXTURES / "transcripts" / "persistent_flaws.jsonl"
    if transcript_path.exists():
        transcript_path.unlink()
    provider = ScriptedProvider([_flawed_payload(i) for i in range(4)])
    gateway = Gateway(mode="record", transcript_path=transcript_path, provider=provider)
    config = AppConfig(mode="record", transcript_path=str(transcript_path), workers=1, seed=SEED, max_revisions=3)
    state = run_workflow(gateway, PERSISTENT_REQUEST, config)
    assert state.status == "needs_human_review", state.status
    assert state.revisions_used == 3
    assert provider.calls == 4

    with open(FIXTURES / "requests" / "persistent_flaws_request.jsonl", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(PERSISTENT_REQUEST.to_dict(), ensure_ascii=False, separators=(",", ":")) + "\n")
    print(f"persistent_flaws: {len(gateway.transcript)} transcript entries, terminal {state.status}")


# ---------------------------------------------------------------------------
# 40-question bank + 3-expert ratings embodying the target statistics.

RATERS = ("expert1", "expert2", "expert3")

TOPICS = [
    "how a spam filter sorts email",
    "why chatbots sometimes give wrong answers",
    "how voice assistants recognize speech",
    "what labeled examples teach a model",
    "why AI recommendations differ between users",
    "how image classifiers tell animals apart",
    "what data a fitness app collects",
    "why translation apps miss slang",
    "how autocomplete predicts the next word",
    "what makes a dataset biased",
]


def _fixture_bank() -> list[tuple[MCQ, tuple[int, ...]]]:
    entries = []
    for i in range(1, 41):
        topic = TOPICS[(i - 1) % len(TOPICS)]
        mcq = MCQ(
            id=f"q{i:03d}",
            stem=f"Question {i}: which statement best describes {topic}?",
            key=f"The accurate statement about {topic} (item {i}).",
            distractors=(
                f"A common misconception about {topic} (item {i}).",
                f"An unrelated claim mixed into item {i}.",
                f"A reversed cause and effect for item {i}.",
            ),
            bloom_level=BloomLevel((i - 1) % 6 + 1),
            grade_band=BAND,
            learning_objective=f"understand {topic}",
            status=McqStatus.APPROVED,
        )
        assert not validate_mcq(mcq)
        entries.append((mcq, make_display_order(mcq, SEED)))
    return entries


# Per-rater response patterns. Each entry maps a rubric item to the set of
# question numbers (1-based) receiving each non-default response; everything
# else gets the default (yes, or "this" for WouldYouUseIt).
def _rating_plan() -> dict[str, dict]:
    q = lambda lo, hi: set(range(lo, hi + 1))  # noqa: E731
    return {
        "expert1": {
            "key_mismatch": q(40, 40),  # 39/40 -> 97.5
            RubricItem.UNDERSTANDABLE: {},
            RubricItem.LO_RELATED: {},
            RubricItem.GRAMMATICAL: {"no": q(1, 1)},  # 97.5
            RubricItem.CLEAR: {"more_or_less": q(1, 1), "no": q(2, 2)},  # yes 95.0
            RubricItem.REPHRASE: {"yes_only": q(1, 3)},  # 7.5
            RubricItem.ANSWERABLE: {},
            RubricItem.CENTRAL: {},
            RubricItem.WOULD_YOU_USE_IT: {
                "rephrased": q(31, 35),
                "both": q(36, 38),
                "neither": q(39, 40),  # usable 38/40 = 95.0
            },
            RubricItem.BLOOMS_LEVEL: {"yes_only": q(1, 14)},  # 35.0
            RubricItem.GRADE_LEVEL: {"no": q(1, 3)},  # 92.5
        },
        "expert2": {
            "key_mismatch": q(35, 40),  # 34/40 -> 85.0
            RubricItem.UNDERSTANDABLE: {},
            RubricItem.LO_RELATED: {"no": q(1, 1)},  # 97.5
            RubricItem.GRAMMATICAL: {"no": q(1, 2)},  # 95.0
            RubricItem.CLEAR: {"more_or_less": q(1, 3), "no": q(4, 4)},  # yes 90.0
            RubricItem.REPHRASE: {"yes_only": q(1, 39)},  # 97.5
            RubricItem.ANSWERABLE: {"no": q(1, 2)},  # 95.0
            RubricItem.CENTRAL: {"no": q(1, 1)},  # 97.5
            RubricItem.WOULD_YOU_USE_IT: {
                "this_only": q(1, 2),
                "rephrased": q(3, 29),
                "both": q(30, 31),
                "neither": q(32, 40),  # usable 31/40 = 77.5
            },
            RubricItem.BLOOMS_LEVEL: {},  # 100.0
            RubricItem.GRADE_LEVEL: {"no": q(1, 8)},  # 80.0
        },
        "expert3": {
            "key_mismatch": q(35, 40),  # 34/40 -> 85.0
            RubricItem.UNDERSTANDABLE: {"no": q(1, 1)},  # 97.5
            RubricItem.LO_RELATED: {"no": q(1, 1)},  # 97.5
            RubricItem.GRAMMATICAL: {"no": q(1, 1)},  # 97.5
            RubricItem.CLEAR: {"more_or_less": q(1, 2)},  # yes 95.0
            RubricItem.REPHRASE: {"yes_only": q(1, 7)},  # 17.5
            RubricItem.ANSWERABLE: {"no": q(1, 1)},  # 97.5
            RubricItem.CENTRAL: {"no": q(1, 1)},  # 97.5
            RubricItem.WOULD_YOU_USE_IT: {
                "this_only": q(1, 20),
                "rephrased": q(21, 30),
                "both": q(31, 32),
                "neither": q(33, 40),  # usable 32/40 = 80.0
            },
            RubricItem.BLOOMS_LEVEL: {},  # 100.0
            RubricItem.GRADE_LEVEL: {"no": q(1, 2)},  # 95.0
        },
    }


def _response_for(item: RubricItem, plan: dict, qnum: int) -> str:
    spec = plan.get(item, {})
    if item is RubricItem.WOULD_YOU_USE_IT:
        for resp in ("rephrased", "both", "neither"):
            if qnum in spec.get(resp, ()):
                return resp
        return "this"
    if "yes_only" in spec:  # default flips to "no"
        return "yes" if qnum in spec["yes_only"] else "no"
    if item is RubricItem.CLEAR:
        if qnum in spec.get("more_or_less", ()):
            return "more_or_less"
        if qnum in spec.get("no", ()):
            return "no"
        return "yes"
    return "no" if qnum in spec.get("no", ()) else "yes"


def build_eval_fixture() -> None:
    (FIXTURES / "banks").mkdir(parents=True, exist_ok=True)
    (FIXTURES / "ratings").mkdir(parents=True, exist_ok=True)
    entries = _fixture_bank()
    save_bank(FIXTURES / "banks" / "ai_literacy_40.jsonl", entries)

    plans = _rating_plan()
    ratings = []
    for rater in RATERS:
        plan = plans[rater]
        for i, (mcq, _) in enumerate(entries, start=1):
            chosen = mcq.distractors[0] if i in plan["key_mismatch"] else mcq.key
            responses = {item: _response_for(item, plan, i) for item in RubricItem}
            ratings.append(
                Rating(
                    rater_id=rater,
                    question_id=mcq.id,
                    responses=responses,
                    chosen_answer=chosen,
                    timestamp="2025-01-15T09:00:00Z",
                )
            )
    rating_set = RatingSet(ratings=tuple(ratings))
    save_ratings(FIXTURES / "ratings" / "expert_ratings.jsonl", rating_set)

    # Verify the statistics the fixture is meant to embody.
    from mcqforge.bank import bank_index
    from mcqforge.evalstats import compute_report, round_half_up

    report = compute_report(rating_set, bank_index(entries))
    key = {r: round_half_up(v) for r, v in report.key_agreement.items()}
    assert key == {"expert1": 97.5, "expert2": 85.0, "expert3": 85.0}, key
    assert round_half_up(report.criteria["LORelated"].summary_mean) == 98.3
    assert round_half_up(report.criteria["Central"].summary_mean) == 98.3
    wyui = report.criteria["WouldYouUseIt"]
    assert round_half_up(wyui.summary_mean) == 84.2
    assert round_half_up(min(wyui.summary_per_rater.values())) == 77.5
    assert round_half_up(max(wyui.summary_per_rater.values())) == 95.0
    rephrase = {r: round_half_up(v) for r, v in report.criteria["Rephrase"].summary_per_rater.items()}
    assert rephrase == {"expert1": 7.5, "expert2": 97.5, "expert3": 17.5}, rephrase
    assert round_half_up(report.criteria["BloomsLevel"].summary_per_rater["expert1"]) == 35.0
    assert round_half_up(report.pairwise["BloomsLevel"]["expert1|expert2"]) == 35.0
    means = [report.criteria[c].summary_mean for c in ("Understandable", "Answerable", "Grammatical", "Clear")]
    assert 93.3 <= round_half_up(min(means)) and round_half_up(max(means)) <= 99.2, means
    print(f"eval fixture: 40 questions x {len(RATERS)} raters, statistics verified")


# ---------------------------------------------------------------------------
# Sample question fixture (used by export and lint tests).

SAMPLE_QUESTION = MCQ(
    id="sample-creative-writing",
    stem=(
        "Ben is considering using an AI tool to help him write a creative story. "
        "Which of the following reasons best explains when using AI might be a bad choice for his learning?"
    ),
    key="It may produce a story that lacks originality and personal expression.",
    distractors=(
        "AI can provide quick feedback on grammar and structure.",
        "Using AI can help him brainstorm new ideas for his story.",
        "AI tools can assist in organizing his thoughts more effectively.",
    ),
    bloom_level=BloomLevel.EVALUATE,
    grade_band=BAND,
    learning_objective="evaluate when AI use helps or harms learning",
    scenario="creative writing",
    status=McqStatus.APPROVED,
)


def build_sample() -> None:
    save_bank(FIXTURES / "banks" / "sample_question.jsonl", [(SAMPLE_QUESTION, make_display_order(SAMPLE_QUESTION, SEED))])
    print("sample question bank written")


if __name__ == "__main__":
    FIXTURES.mkdir(exist_ok=True)
    build_demo5()
    build_persistent_flaws()
    build_eval_fixture()
    build_sample()
    print("fixtures rebuilt")
