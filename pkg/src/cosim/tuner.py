"""Grid search over simplex weights, replacing hand-picked blend weights.

The grid enumerates every weight vector whose components are multiples
of the step and sum to 1 (compositions of 1/step into n parts),
first-component-descending. Ties keep the earliest enumerated vector,
so results are deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Sequence

from .errors import ConfigError, CosimError, DegenerateVectorError, ZeroVarianceError
from .evalmetrics import Correlation, uncentered_pearson

STEP_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TuneResult:
    best_weights: tuple[float, ...]
    best_score: float
    trace: tuple[tuple[tuple[float, ...], float], ...]


def _steps_per_unit(step: float) -> int:
    if not (0.0 < step <= 1.0):
        raise ConfigError(f"step must be in (0, 1], got {step}")
    k = round(1.0 / step)
    if k < 1 or abs(k * step - 1.0) > STEP_TOLERANCE:
        raise ConfigError(f"step {step} does not divide 1")
    return k


def grid_points(n: int, step: float) -> list[tuple[float, ...]]:
    """All simplex vectors with components in {0, step, ..., 1}."""
    if n < 1:
        raise ConfigError(f"need at least one metric, got n={n}")
    k = _steps_per_unit(step)

    points: list[tuple[float, ...]] = []

    def compose(remaining: int, parts: int, prefix: tuple[int, ...]) -> None:
        if parts == 1:
            points.append(prefix + (remaining,))
            return
        for c in range(remaining, -1, -1):
            compose(remaining - c, parts - 1, prefix + (c,))

    compose(k, n, ())
    return [tuple(c / k for c in counts) for counts in points]


def _weighted_column(columns: Sequence[Sequence[float]], weights: tuple[float, ...]) -> list[float]:
    m = len(columns[0])
    out = []
    for row in range(m):
        total = 0.0
        started = False
        for w, col in zip(weights, columns):
            if w == 0.0:
                continue
            term = w * col[row]
            total = term if not started else total + term
            started = True
        out.append(total)
    return out


def grid_search(
    columns: Sequence[Sequence[float]],
    gold: Sequence[float],
    step: float,
    objective: Correlation = uncentered_pearson,
) -> TuneResult:
    """Maximize objective(blend(columns, w), gold) over the weight grid.

    A grid point whose blend is degenerate for the objective (constant,
    or a zero vector) scores -inf instead of erroring; if every point is
    degenerate the underlying error is raised after the sweep.
    """
    if not columns:
        raise ConfigError("need at least one change column")
    m = len(gold)
    for col in columns:
        if len(col) != m:
            raise ConfigError(f"column length {len(col)} does not match gold length {m}")
    if m < 2:
        raise ConfigError(f"need at least 2 rows to tune, got {m}")

    trace: list[tuple[tuple[float, ...], float]] = []
    best_weights: tuple[float, ...] | None = None
    best_score = -math.inf
    last_error: CosimError | None = None
    any_scored = False
    for weights in grid_points(len(columns), step):
        blended = _weighted_column(columns, weights)
        try:
            score = objective(blended, gold)
            any_scored = True
        except (ZeroVarianceError, DegenerateVectorError) as exc:
            score = -math.inf
            last_error = exc
        trace.append((weights, score))
        if score > best_score or best_weights is None:
            best_score = score
            best_weights = weights
    if not any_scored and last_error is not None:
        raise last_error
    assert best_weights is not None
    return TuneResult(best_weights, best_score, tuple(trace))


def write_trace(result: TuneResult, stream: IO[str]) -> None:
    """Trace TSV: one row per grid point, in enumeration order."""
    n = len(result.best_weights)
    stream.write("\t".join([f"w{i + 1}" for i in range(n)] + ["score"]) + "\n")
    for weights, score in result.trace:
        cells = [format(w, ".17g") for w in weights] + [format(score, ".17g")]
        stream.write("\t".join(cells) + "\n")


def format_best(result: TuneResult) -> str:
    weights = ", ".join(f"{w:.2f}" for w in result.best_weights)
    return f"best weights [{weights}] score {result.best_score:.6f}"
