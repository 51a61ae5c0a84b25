"""Question-bank persistence and teacher-facing exports.

The bank file is JSONL: one canonical question object per line (MCQ fields
plus its display_order permutation), UTF-8, stable field order. Exports:

- json: a JSON array of the same canonical objects (round-trips exactly);
- csv: one row per question with lettered option columns;
- gift: the GIFT quiz interchange text format, key marked with "=" and
  distractors with "~", options emitted in display order so the key's
  letter position carries no cue.

A small GIFT parser rides along so exports can be checked independently.
"""

from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path

from .core import MCQ, mcq_from_dict, mcq_to_dict, option_letters, ordered_options, validate_display_order

BankEntry = tuple[MCQ, tuple[int, ...]]


class BankFormatError(ValueError):
    pass


def _entry_to_dict(mcq: MCQ, order: tuple[int, ...]) -> dict:
    record = mcq_to_dict(mcq)
    record["display_order"] = list(order)
    return record


def _entry_from_dict(record: dict) -> BankEntry:
    order = tuple(int(i) for i in record.get("display_order", []))
    mcq = mcq_from_dict(record)
    if not order:
        order = tuple(range(len(mcq.options)))
    validate_display_order(order, len(mcq.options))
    return mcq, order


def save_bank(path: str | Path, entries: list[BankEntry]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for mcq, order in entries:
            fh.write(json.dumps(_entry_to_dict(mcq, order), ensure_ascii=False, separators=(",", ":")) + "\n")


def load_bank(path: str | Path) -> list[BankEntry]:
    entries: list[BankEntry] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                entries.append(_entry_from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise BankFormatError(f"{path}:{line_no}: bad bank record ({exc})") from exc
    return entries


def bank_index(entries: list[BankEntry]) -> dict[str, MCQ]:
    return {mcq.id: mcq for mcq, _ in entries}


# ---------------------------------------------------------------------------
# Exports

def export_json(entries: list[BankEntry]) -> str:
    return json.dumps([_entry_to_dict(m, o) for m, o in entries], ensure_ascii=False, indent=2) + "\n"


def import_json(text: str) -> list[BankEntry]:
    return [_entry_from_dict(record) for record in json.loads(text)]


def export_csv(entries: list[BankEntry]) -> str:
    """Columns: id, stem, option_a..option_<n> (display order), key_letter,
    bloom_level, grade_band, learning_objective, scenario, status, revision."""
    max_options = max((len(m.options) for m, _ in entries), default=4)
    letters = option_letters(max_options)
    header = (
        ["id", "stem"]
        + [f"option_{letter.lower()}" for letter in letters]
        + ["key_letter", "bloom_level", "grade_band", "learning_objective", "scenario", "status", "revision"]
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for mcq, order in entries:
        presented = ordered_options(mcq, order)
        option_cells = [text for _, text, _ in presented]
        option_cells += [""] * (max_options - len(option_cells))
        key_letter = next(letter for letter, _, is_key in presented if is_key)
        writer.writerow(
            [
                mcq.id,
                mcq.stem,
                *option_cells,
                key_letter,
                mcq.bloom_level.label,
                str(mcq.grade_band),
                mcq.learning_objective,
                mcq.scenario or "",
                mcq.status.value,
                mcq.revision,
            ]
        )
    return buf.getvalue()


_GIFT_SPECIALS = "~=#{}:\\"


def _gift_escape(text: str) -> str:
    out = text.replace("\\", "\\\\")
    for ch in "~=#{}:":
        out = out.replace(ch, "\\" + ch)
    return out


def _gift_unescape(text: str) -> str:
    return re.sub(r"\\([~=#{}:\\])", r"\1", text)


def export_gift(entries: list[BankEntry]) -> str:
    """One GIFT block per question; options in display order."""
    blocks = []
    for mcq, order in entries:
        lines = [f"::{_gift_escape(mcq.id)}:: {_gift_escape(mcq.stem)} {{"]
        for _, text, is_key in ordered_options(mcq, order):
            marker = "=" if is_key else "~"
            lines.append(f"{marker}{_gift_escape(text)}")
        lines.append("}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def parse_gift(text: str) -> list[dict]:
    """Minimal GIFT reader for multiple-choice blocks, used to check exports.

    Returns one {"title", "stem", "key", "distractors"} dict per question.
    Handles the escapes this exporter emits; not a general GIFT implementation.
    """
    questions = []
    # Split on unescaped braces: "::title:: stem {" ... "}"
    block_re = re.compile(
        r"::(?P<title>(?:\\.|[^:])*)::\s*(?P<stem>(?:\\.|[^{])*)\{(?P<body>(?:\\.|[^}])*)\}",
        re.DOTALL,
    )
    for match in block_re.finditer(text):
        stem = _gift_unescape(match.group("stem").strip())
        body = match.group("body")
        key = None
        distractors = []
        option_re = re.compile(r"([=~])((?:\\.|[^=~])*)")
        for opt_match in option_re.finditer(body):
            marker, raw = opt_match.group(1), opt_match.group(2).strip()
            if not raw:
                continue
            option_text = _gift_unescape(raw)
            if marker == "=":
                if key is not None:
                    raise BankFormatError("GIFT block has more than one key")
                key = option_text
            else:
                distractors.append(option_text)
        if key is None:
            raise BankFormatError("GIFT block has no key option")
        questions.append(
            {
                "title": _gift_unescape(match.group("title").strip()),
                "stem": stem,
                "key": key,
                "distractors": distractors,
            }
        )
    return questions


EXPORTERS = {"json": export_json, "csv": export_csv, "gift": export_gift}


def export_bank(entries: list[BankEntry], fmt: str) -> str:
    try:
        exporter = EXPORTERS[fmt]
    except KeyError:
        raise BankFormatError(f"unknown export format {fmt!r}; expected one of {sorted(EXPORTERS)}") from None
    return exporter(entries)
