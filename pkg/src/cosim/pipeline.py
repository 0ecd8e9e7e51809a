"""Per-context scoring, per-metric change, and the weighted blend.

For a record and a metric, the context score SC is the
similarity-direction metric value between the two pooled word vectors
in that context; the change is C = SC1 - SC2. With several metrics the
final change is the convex combination sum(w_i * C_i) with the weights
on the simplex. When standardization is on (the default for
dataset-level runs), each metric's change column is z-scored across the
record set before blending so that no metric dominates on scale alone;
stored per-metric values stay raw.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .alignment import extract_word_vector
from .dataset import PairRecord
from .errors import (
    ConfigError,
    CosimError,
    FormatError,
    InvalidWeightsError,
    PipelineError,
    StandardizationError,
)
from .providers import EmbeddingStore
from .vecmath import MetricId, parse_metric, similarity

WEIGHT_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class MetricChange:
    metric: MetricId
    sc1: float
    sc2: float
    change: float  # always sc1 - sc2 of the stored values


@dataclass(frozen=True)
class ChangeSet:
    pair_id: str
    entries: tuple[MetricChange, ...]
    blended: float

    def __post_init__(self):
        metrics = [e.metric for e in self.entries]
        if len(set(metrics)) != len(metrics):
            raise ConfigError(f"duplicate metrics in change set for pair {self.pair_id!r}")

    def entry(self, metric: MetricId) -> MetricChange:
        for e in self.entries:
            if e.metric is metric:
                return e
        raise ConfigError(f"no entry for metric {metric} in pair {self.pair_id!r}")


@dataclass(frozen=True)
class BlendConfig:
    """Ordered metrics with simplex weights; validated on construction."""

    metrics: tuple[MetricId, ...]
    weights: tuple[float, ...]
    standardize: bool = True

    def __post_init__(self):
        object.__setattr__(self, "metrics", tuple(self.metrics))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.metrics) < 1:
            raise ConfigError("at least one metric is required")
        if len(set(self.metrics)) != len(self.metrics):
            raise ConfigError(f"duplicate metrics: {[str(m) for m in self.metrics]}")
        if len(self.weights) != len(self.metrics):
            raise ConfigError(
                f"{len(self.metrics)} metrics but {len(self.weights)} weights"
            )
        for w in self.weights:
            if w < 0.0:
                raise InvalidWeightsError(f"negative weight {w}")
        total = 0.0
        for w in self.weights:
            total += w
        if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise InvalidWeightsError(f"weights sum to {total!r}, expected 1")

    @classmethod
    def uniform(cls, metrics: Sequence[MetricId], standardize: bool = True) -> "BlendConfig":
        n = len(metrics)
        return cls(tuple(metrics), tuple(1.0 / n for _ in range(n)), standardize)


def score_context(
    record: PairRecord, which: int, store: EmbeddingStore, metric: MetricId
) -> float:
    """Similarity-direction score of the record's word pair in context 1 or 2."""
    if which not in (1, 2):
        raise ConfigError(f"context selector must be 1 or 2, got {which!r}")
    embedding = store.lookup(record.id, which)
    form1 = record.word1_context1 if which == 1 else record.word1_context2
    form2 = record.word2_context1 if which == 1 else record.word2_context2
    v1 = extract_word_vector(embedding, form1)
    v2 = extract_word_vector(embedding, form2)
    return similarity(metric, v1, v2)


def change_for_metric(record: PairRecord, store: EmbeddingStore, metric: MetricId) -> float:
    """C = SC1 - SC2 for one metric."""
    return score_context(record, 1, store, metric) - score_context(record, 2, store, metric)


def blend_changes(changes: Sequence[float], config: BlendConfig) -> float:
    """Weighted sum of per-metric changes in config's metric order.

    Zero-weight terms are skipped so a degenerate weight vector like
    [1, 0] reproduces the surviving metric's change bit-exactly.
    """
    if len(changes) != len(config.metrics):
        raise ConfigError(f"{len(changes)} changes for {len(config.metrics)} metrics")
    total = 0.0
    started = False
    for w, c in zip(config.weights, changes):
        if w == 0.0:
            continue
        term = w * c
        total = term if not started else total + term
        started = True
    return total


def standardize_column(values: Sequence[float]) -> list[float]:
    """Population z-score of a column; zero variance is an error."""
    n = len(values)
    if n == 0:
        return []
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    if var == 0.0:
        raise StandardizationError("change column has zero variance, cannot standardize")
    sd = var**0.5
    return [(v - mean) / sd for v in values]


@dataclass(frozen=True)
class SkippedRecord:
    pair_id: str
    reason: str


@dataclass
class PipelineResult:
    changes: list[ChangeSet] = field(default_factory=list)
    skipped: list[SkippedRecord] = field(default_factory=list)


def run_pipeline(
    records: Sequence[PairRecord], store: EmbeddingStore, config: BlendConfig
) -> PipelineResult:
    """Score every record with every configured metric and blend.

    Records that fail (missing embedding, unlocatable word, alignment
    gap) are skipped and reported, not raised; only a run where every
    record fails raises PipelineError. Per-record scoring is order
    independent; standardization and blending happen after all records
    are scored. Output order equals input order.
    """
    scored: list[tuple[PairRecord, dict[MetricId, tuple[float, float]]]] = []
    result = PipelineResult()
    for rec in records:
        try:
            per_metric = {}
            for metric in config.metrics:
                sc1 = score_context(rec, 1, store, metric)
                sc2 = score_context(rec, 2, store, metric)
                per_metric[metric] = (sc1, sc2)
            scored.append((rec, per_metric))
        except CosimError as exc:
            result.skipped.append(SkippedRecord(rec.id, str(exc)))
    if records and not scored:
        raise PipelineError(
            f"all {len(records)} records failed; first: {result.skipped[0].reason}"
        )
    if not scored:
        return result

    raw_changes = {
        metric: [per_metric[metric][0] - per_metric[metric][1] for _, per_metric in scored]
        for metric in config.metrics
    }
    if config.standardize:
        blend_input = {m: standardize_column(col) for m, col in raw_changes.items()}
    else:
        blend_input = raw_changes

    for i, (rec, per_metric) in enumerate(scored):
        entries = tuple(
            MetricChange(m, per_metric[m][0], per_metric[m][1], raw_changes[m][i])
            for m in config.metrics
        )
        blended = blend_changes([blend_input[m][i] for m in config.metrics], config)
        result.changes.append(ChangeSet(rec.id, entries, blended))
    return result


def _fmt(x: float) -> str:
    return format(x, ".17g")


def prediction_header(metrics: Sequence[MetricId]) -> list[str]:
    cols = ["id"]
    cols += [f"sc1_{m}" for m in metrics]
    cols += [f"sc2_{m}" for m in metrics]
    cols += [f"change_{m}" for m in metrics]
    cols.append("change_blend")
    return cols


def write_predictions(
    change_sets: Iterable[ChangeSet], metrics: Sequence[MetricId], stream: IO[str]
) -> None:
    """Prediction TSV: reals carry 17 significant digits (round-trippable)."""
    stream.write("\t".join(prediction_header(metrics)) + "\n")
    for cs in change_sets:
        by_metric = {e.metric: e for e in cs.entries}
        row = [cs.pair_id]
        row += [_fmt(by_metric[m].sc1) for m in metrics]
        row += [_fmt(by_metric[m].sc2) for m in metrics]
        row += [_fmt(by_metric[m].change) for m in metrics]
        row.append(_fmt(cs.blended))
        stream.write("\t".join(row) + "\n")


@dataclass
class PredictionTable:
    metrics: tuple[MetricId, ...]
    ids: list[str]
    sc1: dict[MetricId, list[float]]
    sc2: dict[MetricId, list[float]]
    change: dict[MetricId, list[float]]
    blend: list[float]

    def blend_by_id(self) -> dict[str, float]:
        return dict(zip(self.ids, self.blend))

    def change_by_id(self, metric: MetricId) -> dict[str, float]:
        return dict(zip(self.ids, self.change[metric]))


def parse_predictions(source: Iterable[str]) -> PredictionTable:
    """Read a prediction TSV produced by write_predictions."""
    lines = [ln.rstrip("\n").rstrip("\r") for ln in source]
    lines = [ln for ln in lines if ln != ""]
    if not lines:
        raise FormatError("empty prediction file")
    header = lines[0].split("\t")
    if header[:1] != ["id"] or header[-1:] != ["change_blend"]:
        raise FormatError("prediction header must start with 'id' and end with 'change_blend'")
    metric_names = [c[len("change_") :] for c in header if c.startswith("change_") and c != "change_blend"]
    metrics = tuple(parse_metric(name) for name in metric_names)
    expected = prediction_header(metrics)
    if header != expected:
        raise FormatError(f"prediction header {header} does not match expected {expected}")

    table = PredictionTable(
        metrics, [], {m: [] for m in metrics}, {m: [] for m in metrics}, {m: [] for m in metrics}, []
    )
    n = len(metrics)
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(expected):
            raise FormatError(f"expected {len(expected)} fields, got {len(fields)}", row=lineno)
        try:
            reals = [float(x) for x in fields[1:]]
        except ValueError as exc:
            raise FormatError(f"non-numeric value ({exc})", row=lineno) from None
        table.ids.append(fields[0])
        for i, m in enumerate(metrics):
            table.sc1[m].append(reals[i])
            table.sc2[m].append(reals[n + i])
            table.change[m].append(reals[2 * n + i])
        table.blend.append(reals[3 * n])
    return table
