"""Command line entry point.

Commands: validate, embed, score, evaluate, tune. Exit codes are a
stable contract: 0 success, 1 data-quality or partial failure, 2 usage
or environment failure. Diagnostics go to stderr; data goes to files or
stdout, never mixed.
"""
from __future__ import annotations

import argparse
import os
import sys
from contextlib import contextmanager

from . import dataset, evalmetrics, pipeline, providers, tuner
from .errors import CosimError, EncodingError, FormatError, PairingError
from .pipeline import BlendConfig
from .vecmath import MetricId, parse_metric

ENDPOINT_ENV = "COSIM_ENDPOINT"

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2


def _err(message: str) -> None:
    print(f"cosim: {message}", file=sys.stderr)


@contextmanager
def _out_stream(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _parse_metrics(spec: str) -> tuple[MetricId, ...]:
    return tuple(parse_metric(name.strip()) for name in spec.split(",") if name.strip())


def _blend_config(args, metrics: tuple[MetricId, ...]) -> BlendConfig:
    standardize = not args.no_standardize
    if args.weights is None:
        return BlendConfig.uniform(metrics, standardize)
    weights = tuple(float(w) for w in args.weights.split(","))
    return BlendConfig(metrics, weights, standardize)


def _load_records(args) -> list[dataset.PairRecord]:
    return dataset.load_pair_file(args.data, args.lang)


def _build_store(args, records) -> providers.EmbeddingStore:
    if args.provider == "file":
        if not args.embeddings:
            raise FormatError("--provider file requires --embeddings")
        return providers.load_embedding_file(args.embeddings)
    if args.provider == "synthetic":
        return providers.synthetic_embeddings(records, seed=args.seed, dimension=args.dim)
    if args.provider == "http":
        endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            raise FormatError(f"--provider http requires --endpoint or ${ENDPOINT_ENV}")
        options = providers.FetchOptions(batch_size=args.batch)
        return providers.fetch_embeddings(endpoint, records, options)
    raise FormatError(f"unknown provider {args.provider!r}")


def cmd_validate(args) -> int:
    try:
        records = _load_records(args)
    except (FormatError, EncodingError) as exc:
        _err(str(exc))
        return EXIT_DATA
    report = dataset.validate_records(records)
    print(f"{report.row_count} records")
    for lang in sorted(report.per_language):
        print(f"  {lang}: {report.per_language[lang]}")
    for diag in report.diagnostics:
        print(f"row={diag.row} field={diag.fieldname} problem={diag.problem}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_DATA


def cmd_embed(args) -> int:
    records = _load_records(args)
    store = _build_store(args, records)
    n = providers.write_embedding_file(store, args.out)
    _err(f"wrote {len(store)} contexts ({n} bytes, dim={store.dimension}, provenance={store.provenance})")
    return EXIT_OK


def cmd_score(args) -> int:
    metrics = _parse_metrics(args.metrics)
    config = _blend_config(args, metrics)
    records = _load_records(args)
    store = _build_store(args, records)
    result = pipeline.run_pipeline(records, store, config)
    with _out_stream(args.out) as fh:
        pipeline.write_predictions(result.changes, metrics, fh)
    mode = "population z-score" if config.standardize else "raw"
    _err(
        f"scored {len(result.changes)} records, skipped {len(result.skipped)} "
        f"(blend={mode}, provenance={store.provenance})"
    )
    for skip in result.skipped:
        _err(f"skipped {skip.pair_id}: {skip.reason}")
    return EXIT_OK if not result.skipped else EXIT_DATA


def _paired_columns(args):
    """Load predictions and gold, join on id; returns (table, pairings)."""
    with open(args.pred, encoding="utf-8") as fh:
        table = pipeline.parse_predictions(fh)
    gold = dataset.gold_as_mapping(dataset.load_gold_file(args.gold))
    blend_pairing = evalmetrics.pair_scores(table.blend_by_id(), gold)
    metric_pairings = {
        m: evalmetrics.pair_scores(table.change_by_id(m), gold) for m in table.metrics
    }
    return table, metric_pairings, blend_pairing


def cmd_evaluate(args) -> int:
    try:
        table, metric_pairings, blend_pairing = _paired_columns(args)
    except PairingError as exc:
        _err(str(exc))
        return EXIT_DATA
    objective = evalmetrics.correlation_by_name(args.eval_metric)

    def safe(corr, x, y) -> float | None:
        try:
            return corr(x, y)
        except CosimError:
            return None

    def fmt(score: float | None) -> str:
        if score is None:
            return "undefined"
        return format(score, ".17g") if args.full_precision else f"{score:.3f}"

    cells = [f"{m}={fmt(safe(objective, p.predicted, p.gold))}" for m, p in metric_pairings.items()]
    print(
        f"language={args.lang} n={blend_pairing.m} metric={args.eval_metric} "
        + " ".join(cells)
        + f" blend={fmt(safe(objective, blend_pairing.predicted, blend_pairing.gold))}"
    )
    for name in evalmetrics.CORRELATIONS:
        score = safe(evalmetrics.CORRELATIONS[name], blend_pairing.predicted, blend_pairing.gold)
        print(f"blend_{name}={fmt(score)}")
    return EXIT_OK


def cmd_tune(args) -> int:
    try:
        table, metric_pairings, blend_pairing = _paired_columns(args)
    except PairingError as exc:
        _err(str(exc))
        return EXIT_DATA
    objective = evalmetrics.correlation_by_name(args.eval_metric)
    columns = []
    for m in table.metrics:
        col = list(metric_pairings[m].predicted)
        if not args.no_standardize:
            col = pipeline.standardize_column(col)
        columns.append(col)
    result = tuner.grid_search(columns, blend_pairing.gold, args.step, objective)
    if args.out:
        with _out_stream(args.out) as fh:
            tuner.write_trace(result, fh)
    metrics_label = ",".join(str(m) for m in table.metrics)
    print(f"metrics [{metrics_label}] {tuner.format_best(result)}")
    return EXIT_OK


def _add_data_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="pair file (TSV)")
    p.add_argument("--lang", default="en", help="language code of the pair file (default: en)")


def _add_provider_options(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--provider",
        choices=("file", "synthetic", "http"),
        default="synthetic",
        help="embedding source (default: synthetic)",
    )
    p.add_argument("--embeddings", help="embedding file (for --provider file)")
    p.add_argument("--endpoint", help=f"embedding service base URL (default: ${ENDPOINT_ENV})")
    p.add_argument("--batch", type=int, default=32, help="contexts per request (http provider)")
    p.add_argument("--seed", type=int, default=0, help="seed for the synthetic provider")
    p.add_argument("--dim", type=int, default=32, help="dimension for the synthetic provider")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cosim",
        description="Score the graded effect of context on word-pair similarity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a pair file and report per-language counts")
    _add_data_options(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("embed", help="run a provider and write an embedding file")
    _add_data_options(p)
    _add_provider_options(p)
    p.add_argument("--out", required=True, help="embedding file to write")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("score", help="run the scoring pipeline and write predictions")
    _add_data_options(p)
    _add_provider_options(p)
    p.add_argument("--metrics", default="euclidean,cosine", help="comma list (default: euclidean,cosine)")
    p.add_argument("--weights", help="comma list of blend weights summing to 1 (default: uniform)")
    p.add_argument("--no-standardize", action="store_true", help="blend raw changes instead of z-scores")
    p.add_argument("--out", default="-", help="prediction TSV (default: stdout)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", help="correlate predictions against gold annotations")
    p.add_argument("--pred", required=True, help="prediction TSV from `score`")
    p.add_argument("--gold", required=True, help="gold TSV (id<TAB>change)")
    p.add_argument("--eval-metric", choices=sorted(evalmetrics.CORRELATIONS), default=evalmetrics.DEFAULT_CORRELATION)
    p.add_argument("--lang", default="-", help="language label for the results row")
    p.add_argument("--label", default="-", help="model label for the results row")
    p.add_argument("--full-precision", action="store_true", help="print full float precision")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("tune", help="grid-search blend weights against gold annotations")
    p.add_argument("--pred", required=True, help="prediction TSV from `score`")
    p.add_argument("--gold", required=True, help="gold TSV (id<TAB>change)")
    p.add_argument("--step", type=float, default=0.01, help="weight grid step (default: 0.01)")
    p.add_argument("--eval-metric", choices=sorted(evalmetrics.CORRELATIONS), default=evalmetrics.DEFAULT_CORRELATION)
    p.add_argument("--no-standardize", action="store_true", help="tune on raw changes instead of z-scores")
    p.add_argument("--out", help="trace TSV path")
    p.set_defaults(func=cmd_tune)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        _err(f"cannot open {exc.filename}: {exc.strerror}")
        return EXIT_USAGE
    except OSError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except CosimError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
