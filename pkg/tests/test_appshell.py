"""App shell: bank files, exports, CLI subcommands, and the review service."""

import json

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from mcqforge.bank import (
    BankFormatError,
    bank_index,
    export_bank,
    export_csv,
    export_gift,
    export_json,
    import_json,
    load_bank,
    parse_gift,
    save_bank,
)
from mcqforge.cli import main
from mcqforge.core import MCQ, BloomLevel, GradeBand, make_display_order, normalize_text
from mcqforge.evalstats import RubricItem, load_ratings
from mcqforge.server import create_app
from tests.conftest import FIXTURES, SAMPLE_MCQ


@pytest.fixture
def sample_entries():
    return [(SAMPLE_MCQ, make_display_order(SAMPLE_MCQ, 42))]


class TestBankFiles:
    def test_save_load_round_trip(self, tmp_path, sample_entries):
        path = tmp_path / "bank.jsonl"
        save_bank(path, sample_entries)
        assert load_bank(path) == sample_entries

    def test_bad_record_names_line(self, tmp_path):
        path = tmp_path / "bank.jsonl"
        path.write_text('{"id": "x"}\n')
        with pytest.raises(BankFormatError, match="bank.jsonl:1"):
            load_bank(path)

    def test_bank_index(self, sample_entries):
        assert bank_index(sample_entries) == {SAMPLE_MCQ.id: SAMPLE_MCQ}


class TestExports:
    def test_json_round_trip_byte_identical(self, sample_entries):
        once = export_json(sample_entries)
        assert export_json(import_json(once)) == once

    def test_csv_header_and_key_letter(self, sample_entries):
        text = export_csv(sample_entries)
        lines = text.splitlines()
        assert lines[0].startswith("id,stem,option_a,option_b,option_c,option_d,key_letter")
        # The key letter must point at the key text in display order.
        mcq, order = sample_entries[0]
        row = next(line for line in lines[1:] if line.startswith(mcq.id))
        key_position = order.index(0)
        assert f",{'ABCD'[key_position]}," in row

    def test_gift_sample_question(self, sample_entries):
        gift = export_gift(sample_entries)
        assert "=It may produce a story that lacks originality and personal expression." in gift
        assert gift.count("~") == 3

    def test_gift_round_trip_preserves_content(self, sample_entries):
        parsed = parse_gift(export_gift(sample_entries))
        assert len(parsed) == 1
        block = parsed[0]
        assert block["stem"] == SAMPLE_MCQ.stem
        assert block["key"] == SAMPLE_MCQ.key
        assert set(block["distractors"]) == set(SAMPLE_MCQ.distractors)

    def test_gift_escapes_special_characters(self):
        tricky = MCQ(
            id="tricky",
            stem="What does x = y {mean} in code: roughly?",
            key="x and y hold ~equal values",
            distractors=("x is #greater", "nothing at all"),
            bloom_level=BloomLevel.UNDERSTAND,
            grade_band=GradeBand(7, 9),
            learning_objective="syntax",
        )
        entries = [(tricky, (0, 1, 2))]
        parsed = parse_gift(export_gift(entries))
        assert parsed[0]["stem"] == tricky.stem
        assert parsed[0]["key"] == tricky.key
        assert set(parsed[0]["distractors"]) == set(tricky.distractors)

    def test_unknown_format(self, sample_entries):
        with pytest.raises(BankFormatError):
            export_bank(sample_entries, "docx")

    def test_empty_bank_exports_empty(self):
        assert export_gift([]) == ""


class TestCli:
    def _generate_args(self, out, report, extra=()):
        return [
            "generate",
            "--objectives",
            str(FIXTURES / "requests" / "demo5_requests.jsonl"),
            "--replay",
            str(FIXTURES / "transcripts" / "demo5.jsonl"),
            "--seed",
            "42",
            "--out",
            str(out),
            "--report",
            str(report),
            *extra,
        ]

    def test_generate_replay(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(main, self._generate_args(tmp_path / "b.jsonl", tmp_path / "r.json"))
        assert result.exit_code == 0, result.output
        assert len(load_bank(tmp_path / "b.jsonl")) == 5

    def test_generate_missing_transcript_fails_before_work(self, tmp_path):
        runner = CliRunner()
        args = self._generate_args(tmp_path / "b.jsonl", tmp_path / "r.json")
        args[args.index("--replay") + 1] = str(tmp_path / "missing.jsonl")
        result = runner.invoke(main, args)
        assert result.exit_code != 0
        assert "transcript not found" in result.output
        assert not (tmp_path / "b.jsonl").exists()

    def test_generate_same_seed_identical_banks(self, tmp_path):
        runner = CliRunner()
        for name in ("b1", "b2"):
            result = runner.invoke(
                main, self._generate_args(tmp_path / f"{name}.jsonl", tmp_path / f"{name}.json")
            )
            assert result.exit_code == 0
        assert (tmp_path / "b1.jsonl").read_bytes() == (tmp_path / "b2.jsonl").read_bytes()

    def test_generate_requires_mode(self, tmp_path):
        runner = CliRunner()
        result = runner.invoke(main, ["generate", "--objective", "learn things"])
        assert result.exit_code != 0
        assert "choose exactly one" in result.output

    def test_lint_clean_bank_exits_zero(self):
        runner = CliRunner()
        result = runner.invoke(main, ["lint", str(FIXTURES / "banks" / "sample_question.jsonl")])
        assert result.exit_code == 0, result.output
        assert "flaws=0" in result.output

    def test_lint_flawed_bank_exits_nonzero(self, tmp_path):
        flawed = MCQ(
            id="bad",
            stem="Training data is the set of examples a computer studies. What does more varied training data do?",
            key="It always makes the model perfect at recognizing things.",
            distractors=(
                "It makes the screen brighter while learning.",
                "It lets the model skip studying examples.",
                "All of the above.",
            ),
            bloom_level=BloomLevel.UNDERSTAND,
            grade_band=GradeBand(7, 9),
            learning_objective="training data",
        )
        path = tmp_path / "bad.jsonl"
        save_bank(path, [(flawed, (0, 1, 2, 3))])
        runner = CliRunner()
        result = runner.invoke(main, ["lint", str(path), "--format", "json"])
        assert result.exit_code == 1
        payload = json.loads(result.output)
        assert payload["questions"][0]["flaw_count"] == 2

    def test_readability(self):
        runner = CliRunner()
        result = runner.invoke(main, ["readability", "The cat sat on the mat."])
        assert result.exit_code == 0
        assert result.output.strip() == "-1.45"

    def test_eval_json_matches_library(self, tmp_path):
        runner = CliRunner()
        out = tmp_path / "report.json"
        result = runner.invoke(
            main,
            [
                "eval",
                "--ratings",
                str(FIXTURES / "ratings" / "expert_ratings.jsonl"),
                "--bank",
                str(FIXTURES / "banks" / "ai_literacy_40.jsonl"),
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        from mcqforge.evalstats import compute_report, report_to_json

        ratings = load_ratings(FIXTURES / "ratings" / "expert_ratings.jsonl")
        index = bank_index(load_bank(FIXTURES / "banks" / "ai_literacy_40.jsonl"))
        assert out.read_text() == report_to_json(compute_report(ratings, index))

    def test_export_gift_stdout(self):
        runner = CliRunner()
        result = runner.invoke(
            main, ["export", str(FIXTURES / "banks" / "sample_question.jsonl"), "--format", "gift"]
        )
        assert result.exit_code == 0
        assert "=It may produce a story" in result.output


@pytest.fixture
def client(tmp_path):
    ratings_path = tmp_path / "ratings.jsonl"
    app = create_app(
        bank_path=FIXTURES / "banks" / "ai_literacy_40.jsonl",
        ratings_path=ratings_path,
    )
    return TestClient(app), ratings_path


def full_rating_body(question_id="q001", rater_id="rx", chosen="x") -> dict:
    return {
        "rater_id": rater_id,
        "question_id": question_id,
        "responses": {
            item.value: ("this" if item is RubricItem.WOULD_YOU_USE_IT else "yes") for item in RubricItem
        },
        "chosen_answer": chosen,
    }


class TestServer:
    def test_list_questions_withholds_key(self, client):
        http, _ = client
        payload = http.get("/api/questions").json()
        assert payload["total"] == 40
        for question in payload["questions"]:
            assert "key" not in question
            assert all(set(o) == {"letter", "text"} for o in question["options"])

    def test_get_question_has_rubric_no_key(self, client):
        http, _ = client
        payload = http.get("/api/questions/q001").json()
        assert len(payload["rubric"]) == 10
        assert "key" not in payload

    def test_unknown_question_404(self, client):
        http, _ = client
        response = http.get("/api/questions/q999")
        assert response.status_code == 404
        assert response.json()["detail"]["code"] == "unknown_question"

    def test_post_rating_and_report_updates(self, client):
        http, ratings_path = client
        bank = bank_index(load_bank(FIXTURES / "banks" / "ai_literacy_40.jsonl"))
        body = full_rating_body(chosen=bank["q001"].key)
        response = http.post("/api/ratings", json=body)
        assert response.status_code == 201
        assert response.json()["key"] == bank["q001"].key  # revealed after submission
        report = http.get("/api/report").json()
        assert report["question_counts"] == {"rx": 1}
        stored = load_ratings(ratings_path)
        assert len(stored) == 1

    def test_post_rating_missing_item_400(self, client):
        http, _ = client
        body = full_rating_body()
        del body["responses"]["BloomsLevel"]
        body["chosen_answer"] = "whatever"
        response = http.post("/api/ratings", json=body)
        assert response.status_code == 400
        assert "BloomsLevel" in response.json()["detail"]["message"]

    def test_post_rating_bad_option_400(self, client):
        http, _ = client
        response = http.post("/api/ratings", json=full_rating_body(chosen="not an option"))
        assert response.status_code == 400
        assert response.json()["detail"]["code"] == "unknown_option"

    def test_post_rating_unknown_question_404(self, client):
        http, _ = client
        response = http.post("/api/ratings", json=full_rating_body(question_id="q999"))
        assert response.status_code == 404

    def test_duplicate_rating_409_unless_overwrite(self, client):
        http, _ = client
        bank = bank_index(load_bank(FIXTURES / "banks" / "ai_literacy_40.jsonl"))
        body = full_rating_body(chosen=bank["q001"].key)
        assert http.post("/api/ratings", json=body).status_code == 201
        assert http.post("/api/ratings", json=body).status_code == 409
        assert http.post("/api/ratings?overwrite=true", json=body).status_code == 201

    def test_key_revealed_after_submission(self, client):
        http, _ = client
        bank = bank_index(load_bank(FIXTURES / "banks" / "ai_literacy_40.jsonl"))
        before = http.get("/api/questions/q001?rater_id=rx").json()
        assert "key" not in before
        http.post("/api/ratings", json=full_rating_body(chosen=bank["q001"].key))
        after = http.get("/api/questions/q001?rater_id=rx").json()
        assert after["key"] == bank["q001"].key

    def test_report_bytes_match_cli_eval(self, tmp_path):
        ratings_src = FIXTURES / "ratings" / "expert_ratings.jsonl"
        ratings_path = tmp_path / "ratings.jsonl"
        ratings_path.write_bytes(ratings_src.read_bytes())
        app = create_app(bank_path=FIXTURES / "banks" / "ai_literacy_40.jsonl", ratings_path=ratings_path)
        http = TestClient(app)
        api_bytes = http.get("/api/report").content

        runner = CliRunner()
        out = tmp_path / "cli_report.json"
        result = runner.invoke(
            main,
            [
                "eval",
                "--ratings",
                str(ratings_path),
                "--bank",
                str(FIXTURES / "banks" / "ai_literacy_40.jsonl"),
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 0
        assert api_bytes == out.read_bytes()

    def test_root_serves_fallback_page(self, client):
        http, _ = client
        response = http.get("/")
        assert response.status_code == 200
        assert "review service" in response.text

    def test_progress_counts(self, client):
        http, _ = client
        bank = bank_index(load_bank(FIXTURES / "banks" / "ai_literacy_40.jsonl"))
        http.post("/api/ratings", json=full_rating_body("q001", "r1", bank["q001"].key))
        http.post("/api/ratings", json=full_rating_body("q002", "r1", bank["q002"].key))
        payload = http.get("/api/questions").json()
        assert payload["progress"] == {"r1": 2}
        q1 = next(q for q in payload["questions"] if q["id"] == "q001")
        assert q1["rated_by"] == ["r1"]


class TestKeyAgreementNormalization:
    def test_chosen_answer_compared_normalized(self):
        assert normalize_text("The Key.  ") == normalize_text("the key")
