"""cosim: scores the graded effect of context on word-pair similarity.

The building blocks, in dependency order: vector metrics (vecmath),
dataset parsing (dataset), token-span alignment (alignment), embedding
providers (providers), the scoring pipeline (pipeline), correlation
evaluation (evalmetrics), and weight tuning (tuner). The cli module
wires them together.
"""

from .alignment import CharSpan, ContextEmbedding, Token, extract_word_vector, locate_occurrence, span_to_tokens
from .dataset import GoldRecord, PairRecord, ValidationReport, parse_gold, parse_records, validate_records
from .errors import CosimError
from .evalmetrics import pair_scores, pearson, results_table, spearman, uncentered_pearson
from .pipeline import BlendConfig, ChangeSet, blend_changes, change_for_metric, run_pipeline, score_context
from .providers import EmbeddingStore, FetchOptions, fetch_embeddings, load_embeddings, synthetic_embeddings, write_embeddings
from .tuner import TuneResult, grid_points, grid_search
from .vecmath import MetricId, WordVector, as_similarity, cosine_similarity, euclidean_distance, mean_pool

__version__ = "0.1.0"

__all__ = [
    "BlendConfig",
    "ChangeSet",
    "CharSpan",
    "ContextEmbedding",
    "CosimError",
    "EmbeddingStore",
    "FetchOptions",
    "GoldRecord",
    "MetricId",
    "PairRecord",
    "Token",
    "TuneResult",
    "ValidationReport",
    "WordVector",
    "as_similarity",
    "blend_changes",
    "change_for_metric",
    "cosine_similarity",
    "euclidean_distance",
    "extract_word_vector",
    "fetch_embeddings",
    "grid_points",
    "grid_search",
    "load_embeddings",
    "locate_occurrence",
    "mean_pool",
    "pair_scores",
    "parse_gold",
    "parse_records",
    "pearson",
    "results_table",
    "run_pipeline",
    "score_context",
    "span_to_tokens",
    "spearman",
    "synthetic_embeddings",
    "uncentered_pearson",
    "validate_records",
    "write_embeddings",
]
