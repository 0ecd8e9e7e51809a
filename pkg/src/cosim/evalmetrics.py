"""Correlation measures and the per-language results table.

Three correlations are implemented because the evaluation metric behind
the reference scores is not fixed: centered Pearson, uncentered Pearson
(cosine of the raw score vectors, the default here), and Spearman with
mid-rank ties. All are reported side by side wherever one is chosen.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Callable, Mapping, Sequence

from .errors import (
    ConfigError,
    DegenerateVectorError,
    DimensionError,
    PairingError,
    ZeroVarianceError,
)
from .vecmath import MetricId

Correlation = Callable[[Sequence[float], Sequence[float]], float]


def _check_lengths(x: Sequence[float], y: Sequence[float], minimum: int) -> None:
    if len(x) != len(y):
        raise DimensionError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < minimum:
        raise DimensionError(f"need at least {minimum} points, got {len(x)}")


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Centered Pearson correlation coefficient."""
    _check_lengths(x, y, 2)
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVarianceError("constant input to pearson")
    return sxy / math.sqrt(sxx * syy)


def uncentered_pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Cosine of the raw score vectors (no mean subtraction)."""
    _check_lengths(x, y, 1)
    sxy = sum(a * b for a, b in zip(x, y))
    sxx = sum(a * a for a in x)
    syy = sum(b * b for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateVectorError("zero vector input to uncentered pearson")
    return sxy / (math.sqrt(sxx) * math.sqrt(syy))


def midranks(values: Sequence[float]) -> list[float]:
    """1-based fractional ranks; tied values share the mean of their ranks."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of mid-rank vectors."""
    _check_lengths(x, y, 2)
    return pearson(midranks(x), midranks(y))


CORRELATIONS: dict[str, Correlation] = {
    "pearson": pearson,
    "uncentered": uncentered_pearson,
    "spearman": spearman,
}

DEFAULT_CORRELATION = "uncentered"


def correlation_by_name(name: str) -> Correlation:
    if name not in CORRELATIONS:
        raise ConfigError(f"unknown correlation {name!r} (known: {', '.join(CORRELATIONS)})")
    return CORRELATIONS[name]


@dataclass(frozen=True)
class ScorePairing:
    """Prediction and gold values joined on id, in prediction order."""

    ids: tuple[str, ...]
    predicted: tuple[float, ...]
    gold: tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.ids)


def pair_scores(predicted: Mapping[str, float], gold: Mapping[str, float]) -> ScorePairing:
    """Join predictions with gold by id. Gold entries without a
    prediction are ignored; predictions without gold are orphans."""
    if len(predicted) != len(set(predicted)):
        raise PairingError("duplicate prediction ids")
    orphans = tuple(pid for pid in predicted if pid not in gold)
    if orphans:
        raise PairingError(f"predictions without gold: {list(orphans)}", orphans=orphans)
    ids = tuple(predicted.keys())
    if len(ids) < 2:
        raise PairingError(f"need at least 2 paired scores, got {len(ids)}")
    return ScorePairing(ids, tuple(predicted[i] for i in ids), tuple(gold[i] for i in ids))


@dataclass(frozen=True)
class LanguageEval:
    """Aligned per-language inputs for one results-table row."""

    language: str
    model_label: str
    metric_changes: tuple[tuple[MetricId, tuple[float, ...]], ...]
    blended: tuple[float, ...]
    gold: tuple[float, ...]


@dataclass(frozen=True)
class LanguageResult:
    language: str
    model_label: str
    n: int
    metric_scores: tuple[tuple[MetricId, float], ...]
    blend_score: float


def results_table(
    evals: Sequence[LanguageEval], objective: Correlation = uncentered_pearson
) -> list[LanguageResult]:
    """One row per language, in input order: the chosen correlation of
    every metric's changes and of the blend against gold."""
    rows = []
    for ev in evals:
        metric_scores = tuple(
            (metric, objective(column, ev.gold)) for metric, column in ev.metric_changes
        )
        blend_score = objective(ev.blended, ev.gold)
        rows.append(
            LanguageResult(ev.language, ev.model_label, len(ev.gold), metric_scores, blend_score)
        )
    return rows


def _fmt_score(x: float, full_precision: bool) -> str:
    return format(x, ".17g") if full_precision else f"{x:.3f}"


def results_tsv(rows: Sequence[LanguageResult], stream: IO[str], full_precision: bool = False) -> None:
    if not rows:
        return
    metrics = [m for m, _ in rows[0].metric_scores]
    stream.write("\t".join(["language", "model", "n"] + [str(m) for m in metrics] + ["blend"]) + "\n")
    for row in rows:
        cells = [row.language, row.model_label, str(row.n)]
        cells += [_fmt_score(s, full_precision) for _, s in row.metric_scores]
        cells.append(_fmt_score(row.blend_score, full_precision))
        stream.write("\t".join(cells) + "\n")


def format_results(rows: Sequence[LanguageResult], full_precision: bool = False) -> str:
    """Aligned plain-text table of per-language scores."""
    if not rows:
        return "(no results)\n"
    metrics = [m for m, _ in rows[0].metric_scores]
    header = ["language", "model", "n"] + [str(m) for m in metrics] + ["blend"]
    body = []
    for row in rows:
        cells = [row.language, row.model_label, str(row.n)]
        cells += [_fmt_score(s, full_precision) for _, s in row.metric_scores]
        cells.append(_fmt_score(row.blend_score, full_precision))
        body.append(cells)
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = []
    for cells in [header] + body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip())
    return "\n".join(lines) + "\n"
