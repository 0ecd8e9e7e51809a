"""Token encoders behind the embedding service.

Two backends share one interface (encode(text) -> token dicts with
character offsets and a vector):

- ``ref:<dim>``  deterministic reference encoder, no model files needed.
  Tokens come from a rule-based tokenizer; each vector is seeded-hashed
  from the token and its immediate neighbors, so the same word gets a
  different vector in a different local context.
- ``hf:<model>`` pretrained transformer checkpoint via the transformers
  library: fast-tokenizer offset mapping, final hidden layer vectors.

Offsets always count Unicode scalar values of the original text.
"""
from __future__ import annotations

import hashlib
import random
import re

TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


class OffsetReconstructionError(Exception):
    """Tokenization cannot be mapped back onto the source text."""


def validate_spans(text: str, tokens: list[dict]) -> None:
    """Spans must be in-bounds, nonempty, strictly increasing, and
    non-overlapping; anything else cannot be aligned downstream."""
    prev_end = 0
    for tok in tokens:
        s, e = tok["s"], tok["e"]
        if not (0 <= s < e <= len(text)):
            raise OffsetReconstructionError(
                f"token {tok['t']!r} span [{s}, {e}) out of bounds for length {len(text)}"
            )
        if s < prev_end:
            raise OffsetReconstructionError(
                f"token {tok['t']!r} span [{s}, {e}) overlaps the previous token"
            )
        prev_end = e


class ReferenceEncoder:
    """Deterministic stand-in for a contextual model."""

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {dimension}")
        self.dimension = dimension
        self.model_id = f"ref:{dimension}"

    def _vector(self, token: str, prev: str, nxt: str) -> list[float]:
        material = "\x1f".join([self.model_id, prev, token, nxt]).encode("utf-8")
        seed = int.from_bytes(hashlib.sha256(material).digest(), "big")
        rng = random.Random(seed)
        return [rng.uniform(-1.0, 1.0) for _ in range(self.dimension)]

    def encode(self, text: str) -> list[dict]:
        matches = list(TOKEN_RE.finditer(text))
        words = [m.group(0) for m in matches]
        tokens = []
        for i, m in enumerate(matches):
            prev = words[i - 1] if i > 0 else ""
            nxt = words[i + 1] if i + 1 < len(words) else ""
            tokens.append(
                {
                    "t": m.group(0),
                    "s": m.start(),
                    "e": m.end(),
                    "v": self._vector(m.group(0), prev, nxt),
                }
            )
        validate_spans(text, tokens)
        return tokens


class HFEncoder:
    """Pretrained checkpoint backend (final hidden layer per token)."""

    def __init__(self, model_id: str):
        import torch
        from transformers import AutoModel, AutoTokenizer

        self._torch = torch
        self.model_id = f"hf:{model_id}"
        self.tokenizer = AutoTokenizer.from_pretrained(model_id, use_fast=True)
        self.model = AutoModel.from_pretrained(model_id)
        self.model.eval()
        self.dimension = int(self.model.config.hidden_size)

    def encode(self, text: str) -> list[dict]:
        enc = self.tokenizer(
            text, return_offsets_mapping=True, return_special_tokens_mask=True,
            return_tensors="pt", truncation=True,
        )
        offsets = enc.pop("offset_mapping")[0].tolist()
        special = enc.pop("special_tokens_mask")[0].tolist()
        with self._torch.no_grad():
            hidden = self.model(**enc).last_hidden_state[0]
        token_strings = self.tokenizer.convert_ids_to_tokens(enc["input_ids"][0])
        tokens = []
        for i, ((s, e), is_special) in enumerate(zip(offsets, special)):
            if is_special:
                continue
            if s == e:
                # tokenizer dropped or synthesized characters here
                raise OffsetReconstructionError(
                    f"token {token_strings[i]!r} has an empty offset range"
                )
            tokens.append({"t": token_strings[i], "s": s, "e": e, "v": hidden[i].tolist()})
        validate_spans(text, tokens)
        return tokens


def build_encoder(spec: str):
    """Instantiate an encoder from a model spec string."""
    if spec.startswith("ref:"):
        return ReferenceEncoder(int(spec.split(":", 1)[1]))
    if spec.startswith("hf:"):
        return HFEncoder(spec.split(":", 1)[1])
    raise ValueError(f"model spec {spec!r} must start with 'ref:' or 'hf:'")
