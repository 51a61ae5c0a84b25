"""Shared test fixtures and helpers."""

from __future__ import annotations

import json
import re
from pathlib import Path

import pytest

from mcqforge.config import AppConfig
from mcqforge.core import MCQ, BloomLevel, GenerationRequest, GradeBand, McqStatus
from mcqforge.gateway import Gateway, Transcript

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"

BAND_7_9 = GradeBand(7, 9)

# The shipped sample question: an Evaluate-level item about using AI for
# creative writing, grades 7-9.
SAMPLE_MCQ = MCQ(
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
    grade_band=BAND_7_9,
    learning_objective="evaluate when AI use helps or harms learning",
    scenario="creative writing",
    status=McqStatus.APPROVED,
)


@pytest.fixture
def sample_mcq() -> MCQ:
    return SAMPLE_MCQ


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


class ScriptedProvider:
    """Returns canned raw responses in call order (strings or dicts)."""

    def __init__(self, responses: list):
        self.responses = [r if isinstance(r, str) else json.dumps(r) for r in responses]
        self.calls = 0

    def complete(self, req, prompt_override=None):
        if self.calls >= len(self.responses):
            raise AssertionError(f"scripted provider exhausted after {self.calls} calls")
        response = self.responses[self.calls]
        self.calls += 1
        return response


def record_transcript(requests: list[GenerationRequest], payload_runs: list[list[dict]], **config_kwargs) -> Transcript:
    """Run the real pipeline against scripted payloads and keep the resulting
    transcript in memory. ``payload_runs[i]`` is the draft chain for request i
    (first draft, then one payload per revision)."""
    from mcqforge.supervisor import run_workflow

    flat = [p for run in payload_runs for p in run]
    gateway = Gateway(mode="record", transcript=Transcript(), provider=ScriptedProvider(flat))
    config = AppConfig(mode="record", transcript_path="unused.jsonl", workers=1, **config_kwargs)
    for seq, req in enumerate(requests):
        run_workflow(gateway, req, config, seq=seq)
    return gateway.transcript


def replay_gateway(transcript: Transcript) -> Gateway:
    return Gateway(mode="replay", transcript=transcript)


def make_request(objective: str = "explain what training data is", **kwargs) -> GenerationRequest:
    defaults = dict(bloom_level=BloomLevel.UNDERSTAND, grade_band=BAND_7_9)
    defaults.update(kwargs)
    return GenerationRequest(learning_objective=objective, **defaults)


CLEAN_PAYLOAD = {
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
}

# Two deterministic flaws: an all-of-the-above option plus an absolute term.
FLAWED_PAYLOAD = {
    "stem": "Training data is the set of examples a computer studies. What does more varied training data do?",
    "key": "It always makes the model perfect at recognizing things.",
    "distractors": [
        "It makes the screen brighter while learning.",
        "It lets the model skip studying examples.",
        "All of the above.",
    ],
}

_CRITERION_NAMES = {
    "A1": "workflow determinism (replay byte-identical, < 5 s)",
    "A2": "acceptance rule (approve at 0-1 flaws + language pass)",
    "A3": "revision budget (1 + 3 generator calls, then human review)",
    "A4": "IWF oracle suite (14 single-flaw fixtures + clean sample)",
    "A5": "readability oracles (FK values, syllable list)",
    "A6": "statistics reproduction (key agreement, rubric rates)",
    "A7": "export fidelity (GIFT checker, JSON round trip)",
    "A8": "property suites (>= 200 cases each)",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion when that module ran."""
    outcomes: dict[str, bool] = {}
    for status, ok in (("passed", True), ("failed", False), ("error", False)):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            match = re.search(r"TestA(\d+)", nodeid)
            if not match:
                continue
            criterion = f"A{match.group(1)}"
            outcomes[criterion] = outcomes.get(criterion, True) and ok
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for criterion in sorted(outcomes, key=lambda c: int(c[1:])):
        verdict = "PASS" if outcomes[criterion] else "FAIL"
        terminalreporter.write_line(f"{criterion} {verdict} — {_CRITERION_NAMES[criterion]}")
