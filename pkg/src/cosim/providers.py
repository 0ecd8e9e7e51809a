"""Embedding providers: file, deterministic synthetic, and remote HTTP.

All three produce the same EmbeddingStore and pass the same validation,
so they are interchangeable behind the CLI's --provider switch.

Embedding file format (UTF-8 JSON Lines):
    header line:  {"format": "ctxemb/1", "dimension": D, "provenance": "..."}
    data lines:   {"pair_id": "...", "context": 1|2, "text": "...",
                   "tokens": [{"t": "...", "s": 0, "e": 5, "v": [..D floats..]}]}
Offsets are Unicode scalar values. Serialization is canonical (keys
sorted by (pair_id, context), fixed field order, shortest round-trip
float text), so equal stores produce byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import requests

from .alignment import ContextEmbedding, Token
from .dataset import PairRecord
from .errors import (
    BackendError,
    DimensionError,
    EncodingError,
    FormatError,
    IoError,
    MissingEmbeddingError,
    ProtocolError,
)
from .vecmath import WordVector

FORMAT_NAME = "ctxemb/1"

Key = tuple[str, int]  # (pair_id, context index 1|2)


@dataclass(frozen=True)
class EmbeddingStore:
    """Immutable map from (pair_id, context) to ContextEmbedding."""

    embeddings: dict[Key, ContextEmbedding]
    dimension: int
    provenance: str

    def __post_init__(self):
        if self.dimension < 1:
            raise DimensionError(f"dimension must be >= 1, got {self.dimension}")
        for key, emb in self.embeddings.items():
            pair_id, ctx = key
            if ctx not in (1, 2):
                raise FormatError(f"context index must be 1 or 2, got {ctx!r} for pair {pair_id!r}")
            if emb.dim is not None and emb.dim != self.dimension:
                raise DimensionError(
                    f"embedding for {key!r} has dim {emb.dim}, store declares {self.dimension}"
                )

    def lookup(self, pair_id: str, context: int) -> ContextEmbedding:
        try:
            return self.embeddings[(pair_id, context)]
        except KeyError:
            raise MissingEmbeddingError(
                f"no embedding stored for pair {pair_id!r} context {context}"
            ) from None

    def __len__(self) -> int:
        return len(self.embeddings)

    def keys(self) -> Iterable[Key]:
        return self.embeddings.keys()


def _iter_text_lines(stream: IO[str] | IO[bytes]) -> Iterable[str]:
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            try:
                yield raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise EncodingError(f"line {lineno}: not valid UTF-8 ({exc})") from exc
        else:
            yield raw


def _reject_constant(name):
    raise FormatError(f"non-finite number {name!r} is not allowed")


def _parse_tokens(raw_tokens, dimension: int, where: str) -> list[Token]:
    tokens: list[Token] = []
    for tok in raw_tokens:
        if not isinstance(tok, dict):
            raise FormatError(f"{where}: token entry is not an object")
        for key_name in ("t", "s", "e", "v"):
            if key_name not in tok:
                raise FormatError(f"{where}: token missing {key_name!r} field")
        text, start, end, vec = tok["t"], tok["s"], tok["e"], tok["v"]
        if not isinstance(text, str) or not isinstance(start, int) or not isinstance(end, int):
            raise FormatError(f"{where}: token fields have wrong types")
        if not isinstance(vec, list):
            raise FormatError(f"{where}: token vector is not a list")
        if len(vec) != dimension:
            raise DimensionError(f"{where}: token vector has {len(vec)} components, expected {dimension}")
        tokens.append(Token(text, start, end, WordVector(tuple(float(x) for x in vec))))
    return tokens


def load_embeddings(stream: IO[str] | IO[bytes]) -> EmbeddingStore:
    """Read an embedding file, validating every span and dimension."""
    lines = iter(_iter_text_lines(stream))
    try:
        header_line = next(lines)
    except StopIteration:
        raise FormatError("empty embedding file (missing header line)") from None
    try:
        header = json.loads(header_line, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"line 1: invalid JSON ({exc})") from exc
    if not isinstance(header, dict) or header.get("format") != FORMAT_NAME:
        raise FormatError(f"line 1: expected header with format {FORMAT_NAME!r}")
    dimension = header.get("dimension")
    if not isinstance(dimension, int) or dimension < 1:
        raise FormatError("line 1: header dimension must be a positive integer")
    provenance = header.get("provenance", "")

    embeddings: dict[Key, ContextEmbedding] = {}
    for lineno, line in enumerate(lines, start=2):
        if line.strip() == "":
            continue
        try:
            obj = json.loads(line, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON ({exc})", row=lineno) from exc
        try:
            pair_id = obj["pair_id"]
            context = obj["context"]
            text = obj["text"]
            raw_tokens = obj["tokens"]
        except (KeyError, TypeError):
            raise FormatError("data line missing pair_id/context/text/tokens", row=lineno) from None
        if context not in (1, 2):
            raise FormatError(f"context must be 1 or 2, got {context!r}", row=lineno)
        key = (str(pair_id), int(context))
        if key in embeddings:
            raise FormatError(f"duplicate key {key!r}", row=lineno)
        tokens = _parse_tokens(raw_tokens, dimension, f"line {lineno}")
        embeddings[key] = ContextEmbedding(text, tuple(tokens))
    return EmbeddingStore(embeddings, dimension, provenance)


def write_embeddings(store: EmbeddingStore, stream: IO[str]) -> int:
    """Write the canonical serialization; returns bytes written."""

    def dump(obj) -> str:
        return json.dumps(obj, ensure_ascii=False, separators=(",", ":"), allow_nan=False)

    count = 0
    try:
        header = {"format": FORMAT_NAME, "dimension": store.dimension, "provenance": store.provenance}
        line = dump(header) + "\n"
        stream.write(line)
        count += len(line.encode("utf-8"))
        for pair_id, ctx in sorted(store.embeddings):
            emb = store.embeddings[(pair_id, ctx)]
            obj = {
                "pair_id": pair_id,
                "context": ctx,
                "text": emb.context_text,
                "tokens": [
                    {"t": t.text, "s": t.start, "e": t.end, "v": list(t.vector.values)}
                    for t in emb.tokens
                ],
            }
            line = dump(obj) + "\n"
            stream.write(line)
            count += len(line.encode("utf-8"))
    except OSError as exc:
        raise IoError(f"failed writing embedding file: {exc}") from exc
    return count


def load_embedding_file(path: str | Path) -> EmbeddingStore:
    with open(path, "rb") as fh:
        return load_embeddings(fh)


def write_embedding_file(store: EmbeddingStore, path: str | Path) -> int:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        return write_embeddings(store, fh)


def _whitespace_tokens(text: str) -> list[tuple[str, int, int]]:
    spans = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        spans.append((text[i:j], i, j))
        i = j
    return spans


def _token_vector(seed: int, pair_id: str, context: int, token_text: str, dimension: int) -> WordVector:
    material = b"\x1f".join(
        [str(seed).encode(), pair_id.encode(), str(context).encode(), token_text.encode()]
    )
    child_seed = int.from_bytes(hashlib.sha256(material).digest(), "big")
    rng = random.Random(child_seed)
    return WordVector(tuple(rng.uniform(-1.0, 1.0) for _ in range(dimension)))


def synthetic_embeddings(records: Sequence[PairRecord], seed: int, dimension: int) -> EmbeddingStore:
    """Deterministic test-double provider.

    Contexts are whitespace-tokenized with exact offsets; each token
    vector is derived from (seed, pair id, context index, token text)
    via a splittable hash, so identical inputs give a bit-identical
    store and the same word gets different vectors in different
    contexts.
    """
    if dimension < 1:
        raise DimensionError(f"dimension must be >= 1, got {dimension}")
    embeddings: dict[Key, ContextEmbedding] = {}
    for rec in records:
        for ctx, text in ((1, rec.context1), (2, rec.context2)):
            key = (rec.id, ctx)
            if key in embeddings:
                raise FormatError(f"duplicate pair id {rec.id!r}")
            tokens = tuple(
                Token(tok, s, e, _token_vector(seed, rec.id, ctx, tok, dimension))
                for tok, s, e in _whitespace_tokens(text)
            )
            embeddings[key] = ContextEmbedding(text, tokens)
    return EmbeddingStore(embeddings, dimension, f"synthetic(seed={seed},dim={dimension})")


@dataclass(frozen=True)
class FetchOptions:
    batch_size: int = 32
    timeout: float = 30.0
    retries: int = 3  # additional attempts after the first
    backoff: float = 0.5  # seconds, doubled per retry

    def __post_init__(self):
        if self.batch_size < 1:
            raise DimensionError(f"batch size must be >= 1, got {self.batch_size}")


def _post_with_retries(endpoint: str, payload: dict, options: FetchOptions, ids: list[str]) -> dict:
    url = endpoint.rstrip("/") + "/embed"
    delay = options.backoff
    last_failure = None
    for attempt in range(options.retries + 1):
        if attempt > 0:
            time.sleep(delay)
            delay *= 2
        try:
            resp = requests.post(url, json=payload, timeout=options.timeout)
        except requests.RequestException as exc:
            last_failure = f"transport error: {exc}"
            continue
        if resp.status_code >= 500:
            last_failure = f"server error HTTP {resp.status_code}"
            continue
        if resp.status_code != 200:
            raise BackendError(
                f"backend rejected request with HTTP {resp.status_code} "
                f"for contexts {ids}: {resp.text[:200]}"
            )
        try:
            return resp.json()
        except ValueError as exc:
            raise ProtocolError(f"response is not valid JSON: {exc}") from exc
    raise BackendError(
        f"backend unreachable after {options.retries + 1} attempts "
        f"for contexts {ids} ({last_failure})"
    )


def fetch_embeddings(
    endpoint: str,
    records: Sequence[PairRecord],
    options: FetchOptions = FetchOptions(),
) -> EmbeddingStore:
    """Fetch ContextEmbeddings for every record context from a remote
    service speaking the /embed protocol.

    Contexts are sent in batches of options.batch_size (one request per
    batch on the happy path); responses are validated exactly like
    embedding files. Any batch still failing after the retry budget
    aborts the fetch with the offending context keys.
    """
    if not records:
        raise BackendError("fetch_embeddings requires at least one record")
    languages = {rec.language for rec in records}
    if len(languages) > 1:
        raise FormatError(f"records mix languages {sorted(languages)}; fetch one language at a time")
    language = records[0].language

    requests_plan: list[tuple[str, Key, str]] = []  # (wire id, store key, text)
    for rec in records:
        for ctx, text in ((1, rec.context1), (2, rec.context2)):
            wire_id = str(len(requests_plan))
            requests_plan.append((wire_id, (rec.id, ctx), text))

    embeddings: dict[Key, ContextEmbedding] = {}
    dimension: int | None = None
    for start in range(0, len(requests_plan), options.batch_size):
        batch = requests_plan[start : start + options.batch_size]
        payload = {
            "texts": [{"id": wire_id, "text": text} for wire_id, _, text in batch],
            "language": language,
        }
        batch_keys = [f"{key[0]}#{key[1]}" for _, key, _ in batch]
        body = _post_with_retries(endpoint, payload, options, batch_keys)

        if not isinstance(body, dict) or "dimension" not in body or "items" not in body:
            raise ProtocolError("response missing dimension/items")
        if not isinstance(body["dimension"], int) or body["dimension"] < 1:
            raise ProtocolError(f"bad response dimension {body['dimension']!r}")
        if dimension is None:
            dimension = body["dimension"]
        elif body["dimension"] != dimension:
            raise ProtocolError(
                f"dimension changed across batches: {dimension} then {body['dimension']}"
            )

        by_wire_id = {wire_id: (key, text) for wire_id, key, text in batch}
        seen: set[str] = set()
        for item in body["items"]:
            if not isinstance(item, dict) or "id" not in item or "tokens" not in item:
                raise ProtocolError("response item missing id/tokens")
            wire_id = item["id"]
            if wire_id not in by_wire_id:
                raise ProtocolError(f"response carries unknown id {wire_id!r}")
            if wire_id in seen:
                raise ProtocolError(f"response repeats id {wire_id!r}")
            seen.add(wire_id)
            key, text = by_wire_id[wire_id]
            try:
                tokens = _parse_tokens(item["tokens"], dimension, f"response item {wire_id}")
            except (FormatError, DimensionError) as exc:
                raise ProtocolError(str(exc)) from exc
            embeddings[key] = ContextEmbedding(text, tuple(tokens))
        missing = [wid for wid in by_wire_id if wid not in seen]
        if missing:
            missing_keys = [f"{by_wire_id[w][0][0]}#{by_wire_id[w][0][1]}" for w in missing]
            raise ProtocolError(f"response missing items for contexts {missing_keys}")

    assert dimension is not None
    return EmbeddingStore(embeddings, dimension, f"http({endpoint})")
