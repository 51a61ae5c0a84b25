"""Review service: the HTTP API behind the rubric evaluation UI.

Raters fetch questions (with the key withheld), submit ratings, and watch
the aggregate report. The key for a question is revealed to a rater only
after that rater's rubric submission, so key agreement measures judgment
rather than copying.

Persistence is an append-only ratings JSONL: every accepted rating is one
flushed line, duplicates (with overwrite) append a superseding line, and
the loader keeps the last occurrence per (rater, question).
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse, HTMLResponse, Response
from pydantic import BaseModel, Field

from .bank import bank_index, load_bank
from .core import MCQ, ordered_options
from .evalstats import (
    Rating,
    RatingSet,
    RatingValidationError,
    compute_report,
    report_to_json,
    rubric_schema,
)

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>mcqforge review</title></head>
<body><h1>mcqforge review service</h1>
<p>No UI assets configured. The JSON API is live under <code>/api</code>:
<code>/api/questions</code>, <code>/api/questions/{id}</code>,
<code>/api/ratings</code>, <code>/api/report</code>.</p></body></html>
"""


class RatingIn(BaseModel):
    rater_id: str
    question_id: str
    responses: dict[str, str]
    chosen_answer: str
    timestamp: str = Field(default="")


class RatingsStore:
    """Append-only JSONL store with serialized writes."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def load(self) -> RatingSet:
        if not self.path.exists():
            return RatingSet(ratings=())
        from .evalstats import load_ratings

        return load_ratings(self.path)

    def existing_pairs(self) -> set[tuple[str, str]]:
        return {(r.rater_id, r.question_id) for r in self.load().ratings}

    def append(self, rating: Rating) -> None:
        line = json.dumps(rating.to_dict(), ensure_ascii=False, separators=(",", ":")) + "\n"
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()


def _public_question(mcq: MCQ, order: tuple[int, ...]) -> dict:
    """Question payload safe to show a rater: no key field, no key marking."""
    return {
        "id": mcq.id,
        "stem": mcq.stem,
        "options": [{"letter": letter, "text": text} for letter, text, _ in ordered_options(mcq, order)],
        "bloom_level": mcq.bloom_level.label,
        "grade_band": {"low": mcq.grade_band.low, "high": mcq.grade_band.high},
        "learning_objective": mcq.learning_objective,
        "scenario": mcq.scenario,
    }


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def create_app(bank_path: str | Path, ratings_path: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    entries = load_bank(bank_path)
    index = bank_index(entries)
    orders = {mcq.id: order for mcq, order in entries}
    store = RatingsStore(ratings_path)

    app = FastAPI(title="mcqforge review service")

    @app.get("/api/questions")
    def list_questions() -> dict:
        ratings = store.load()
        progress = {rater: len(ratings.by_rater(rater)) for rater in ratings.raters()}
        rated_by: dict[str, list[str]] = {qid: [] for qid in index}
        for rating in ratings.ratings:
            if rating.question_id in rated_by:
                rated_by[rating.question_id].append(rating.rater_id)
        return {
            "questions": [
                {**_public_question(mcq, order), "rated_by": sorted(rated_by[mcq.id])}
                for mcq, order in entries
            ],
            "progress": progress,
            "total": len(entries),
        }

    @app.get("/api/questions/{question_id}")
    def get_question(question_id: str, rater_id: str | None = Query(default=None)) -> dict:
        if question_id not in index:
            raise _error(404, "unknown_question", f"no question {question_id!r}")
        mcq = index[question_id]
        payload = _public_question(mcq, orders[question_id])
        payload["rubric"] = rubric_schema()
        if rater_id and (rater_id, question_id) in store.existing_pairs():
            # Rubric already submitted by this rater: key may be revealed.
            payload["key"] = mcq.key
        return payload

    @app.post("/api/ratings", status_code=201)
    def post_rating(body: RatingIn, overwrite: bool = Query(default=False)) -> dict:
        if body.question_id not in index:
            raise _error(404, "unknown_question", f"no question {body.question_id!r}")
        mcq = index[body.question_id]
        try:
            rating = Rating.from_dict(body.model_dump())
        except RatingValidationError as exc:
            raise _error(400, "invalid_rating", str(exc))
        option_texts = set(mcq.options)
        if rating.chosen_answer not in option_texts:
            raise _error(400, "unknown_option", "chosen_answer is not one of the question's options")
        if (rating.rater_id, rating.question_id) in store.existing_pairs() and not overwrite:
            raise _error(409, "duplicate_rating", "this rater already rated this question (use overwrite=true)")
        store.append(rating)
        return {"stored": True, "key": mcq.key}

    @app.get("/api/report")
    def get_report() -> Response:
        report = compute_report(store.load(), index)
        # Same bytes as the CLI `eval --format json` output.
        return Response(content=report_to_json(report), media_type="application/json")

    ui_path = Path(ui_dir) if ui_dir else None

    @app.get("/", response_class=HTMLResponse)
    def root():
        if ui_path and (ui_path / "index.html").exists():
            return FileResponse(ui_path / "index.html")
        return HTMLResponse(_FALLBACK_PAGE)

    if ui_path:
        from fastapi.staticfiles import StaticFiles

        if ui_path.exists():
            app.mount("/static", StaticFiles(directory=ui_path), name="static")

    return app
