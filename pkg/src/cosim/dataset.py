"""Parsing and validation of CoSimLex-style pair files and gold files.

Pair files are UTF-8 TSV with eight content columns
(word1, word2, context1, context2, word1_context1, word2_context1,
word1_context2, word2_context2), an optional leading id column, and an
optional header. Tab is the only separator; no Unicode normalization is
applied anywhere, matching is byte-exact on the decoded text so that
character offsets stay stable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import DuplicateIdError, EncodingError, FormatError

PAIR_COLUMNS = (
    "word1",
    "word2",
    "context1",
    "context2",
    "word1_context1",
    "word2_context1",
    "word1_context2",
    "word2_context2",
)

# (surface form field, context field it must occur in)
SURFACE_FIELDS = (
    ("word1_context1", "context1"),
    ("word2_context1", "context1"),
    ("word1_context2", "context2"),
    ("word2_context2", "context2"),
)

LANGUAGES = ("en", "hr", "fi", "sl")


@dataclass(frozen=True)
class PairRecord:
    """One dataset row: a word pair with its two contexts and the four
    in-context surface forms."""

    id: str
    language: str
    word1: str
    word2: str
    context1: str
    context2: str
    word1_context1: str
    word2_context1: str
    word1_context2: str
    word2_context2: str


@dataclass(frozen=True)
class GoldRecord:
    """Human-annotated similarity change for one pair id."""

    id: str
    change: float


@dataclass(frozen=True)
class Diagnostic:
    row: str
    fieldname: str
    problem: str


@dataclass
class ValidationReport:
    row_count: int = 0
    accepted: int = 0
    rejected: int = 0
    per_language: dict[str, int] = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def _strip_newline(line: str) -> str:
    if line.endswith("\n"):
        line = line[:-1]
    if line.endswith("\r"):
        line = line[:-1]
    return line


def _rows(source: Iterable[str]) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, line) skipping blank lines; decode
    failures surface as EncodingError."""
    lineno = 0
    it = iter(source)
    while True:
        lineno += 1
        try:
            line = next(it)
        except StopIteration:
            return
        except UnicodeDecodeError as exc:
            raise EncodingError(f"line {lineno}: input is not valid UTF-8 ({exc})") from exc
        line = _strip_newline(line)
        if line == "":
            continue
        yield lineno, line


def parse_records(source: Iterable[str], language: str) -> list[PairRecord]:
    """Parse a pair file into PairRecords, in input row order.

    Rows carry 8 fields (ids become zero-based row ordinals) or 9
    fields with a leading id. A header is recognized only by exact
    column-name match on the first fields.
    """
    records: list[PairRecord] = []
    ordinal = 0
    first = True
    for lineno, line in _rows(source):
        fields = line.split("\t")
        if first:
            first = False
            if fields[0] == "word1" or (len(fields) > 1 and fields[0] == "id" and fields[1] == "word1"):
                continue
        if len(fields) == len(PAIR_COLUMNS):
            rec_id = str(ordinal)
        elif len(fields) == len(PAIR_COLUMNS) + 1:
            rec_id, fields = fields[0], fields[1:]
        else:
            raise FormatError(
                f"expected {len(PAIR_COLUMNS)} or {len(PAIR_COLUMNS) + 1} fields, got {len(fields)}",
                row=lineno,
            )
        records.append(PairRecord(rec_id, language, *fields))
        ordinal += 1
    return records


def write_records(records: Iterable[PairRecord], stream: IO[str]) -> None:
    """Serialize records as TSV with a leading id column and header."""
    stream.write("id\t" + "\t".join(PAIR_COLUMNS) + "\n")
    for rec in records:
        row = [rec.id] + [getattr(rec, col) for col in PAIR_COLUMNS]
        stream.write("\t".join(row) + "\n")


def load_pair_file(path: str | Path, language: str) -> list[PairRecord]:
    with open(path, encoding="utf-8") as fh:
        return parse_records(fh, language)


def validate_records(records: Iterable[PairRecord]) -> ValidationReport:
    """Check field nonemptiness and surface-form occurrence.

    Problems are reported, never raised; records are not mutated.
    """
    report = ValidationReport()
    for rec in records:
        report.row_count += 1
        report.per_language[rec.language] = report.per_language.get(rec.language, 0) + 1
        problems: list[Diagnostic] = []
        for col in PAIR_COLUMNS:
            if getattr(rec, col).strip() == "":
                problems.append(Diagnostic(rec.id, col, "empty field"))
        for form_field, ctx_field in SURFACE_FIELDS:
            form = getattr(rec, form_field)
            ctx = getattr(rec, ctx_field)
            if form.strip() != "" and form not in ctx:
                problems.append(
                    Diagnostic(rec.id, form_field, f"surface form {form!r} not found in {ctx_field}")
                )
        if problems:
            report.rejected += 1
            report.diagnostics.extend(problems)
        else:
            report.accepted += 1
    return report


def parse_gold(source: Iterable[str]) -> list[GoldRecord]:
    """Parse a gold file: `id<TAB>change` per row, optional exact header."""
    records: list[GoldRecord] = []
    seen: set[str] = set()
    first = True
    for lineno, line in _rows(source):
        fields = line.split("\t")
        if first:
            first = False
            if fields == ["id", "change"]:
                continue
        if len(fields) != 2:
            raise FormatError(f"expected 2 fields, got {len(fields)}", row=lineno)
        rec_id, raw_change = fields
        try:
            change = float(raw_change)
        except ValueError:
            raise FormatError(f"non-numeric change {raw_change!r}", row=lineno) from None
        if change != change or change in (float("inf"), float("-inf")):
            raise FormatError(f"non-finite change {raw_change!r}", row=lineno)
        if rec_id in seen:
            raise DuplicateIdError(f"duplicate id {rec_id!r} in gold file")
        seen.add(rec_id)
        records.append(GoldRecord(rec_id, change))
    return records


def load_gold_file(path: str | Path) -> list[GoldRecord]:
    with open(path, encoding="utf-8") as fh:
        return parse_gold(fh)


def gold_as_mapping(records: Iterable[GoldRecord]) -> dict[str, float]:
    return {rec.id: rec.change for rec in records}
