"""Shared fixtures: a hand-planted 2-record dataset with 2-dimensional
embeddings whose expected scores are computed by independent oracles in
the tests that use them."""
import io
import json

import pytest

from cosim.alignment import ContextEmbedding, Token
from cosim.dataset import PairRecord
from cosim.providers import EmbeddingStore
from cosim.vecmath import WordVector

PLANTED_PAIR_TSV = (
    "word1\tword2\tcontext1\tcontext2\tword1_context1\tword2_context1\t"
    "word1_context2\tword2_context2\n"
    "alpha\tbeta\talpha beta\talpha beta\talpha\tbeta\talpha\tbeta\n"
    "unbank\tmoney\tunbank money\tunbank cash\tunbank\tmoney\tunbank\tcash\n"
)

# (pair_id, context) -> (text, [(token, start, end, vector), ...])
PLANTED_EMBEDDINGS = {
    ("0", 1): ("alpha beta", [("alpha", 0, 5, (3.0, 4.0)), ("beta", 6, 10, (4.0, 3.0))]),
    ("0", 2): ("alpha beta", [("alpha", 0, 5, (1.0, 0.0)), ("beta", 6, 10, (0.0, 1.0))]),
    ("1", 1): (
        "unbank money",
        [("un", 0, 2, (0.0, 0.0)), ("bank", 2, 6, (2.0, 4.0)), ("money", 7, 12, (2.0, 1.0))],
    ),
    ("1", 2): ("unbank cash", [("unbank", 0, 6, (0.0, 3.0)), ("cash", 7, 11, (4.0, 0.0))]),
}


def planted_records() -> list[PairRecord]:
    return [
        PairRecord("0", "en", "alpha", "beta", "alpha beta", "alpha beta",
                   "alpha", "beta", "alpha", "beta"),
        PairRecord("1", "en", "unbank", "money", "unbank money", "unbank cash",
                   "unbank", "money", "unbank", "cash"),
    ]


def planted_store() -> EmbeddingStore:
    embeddings = {}
    for key, (text, toks) in PLANTED_EMBEDDINGS.items():
        tokens = tuple(Token(t, s, e, WordVector(v)) for t, s, e, v in toks)
        embeddings[key] = ContextEmbedding(text, tokens)
    return EmbeddingStore(embeddings, 2, "planted")


def planted_embedding_jsonl() -> str:
    lines = [json.dumps({"format": "ctxemb/1", "dimension": 2, "provenance": "planted"})]
    for (pair_id, ctx), (text, toks) in sorted(PLANTED_EMBEDDINGS.items()):
        lines.append(
            json.dumps(
                {
                    "pair_id": pair_id,
                    "context": ctx,
                    "text": text,
                    "tokens": [{"t": t, "s": s, "e": e, "v": list(v)} for t, s, e, v in toks],
                }
            )
        )
    return "\n".join(lines) + "\n"


@pytest.fixture
def records():
    return planted_records()


@pytest.fixture
def store():
    return planted_store()


@pytest.fixture
def pair_file(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text(PLANTED_PAIR_TSV, encoding="utf-8")
    return path


@pytest.fixture
def embedding_file(tmp_path):
    path = tmp_path / "planted.jsonl"
    path.write_text(planted_embedding_jsonl(), encoding="utf-8")
    return path
