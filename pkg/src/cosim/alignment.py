"""Locating a target word in a context and pooling the tokens it covers.

Offsets everywhere are Unicode scalar values (Python str indices), not
bytes; providers must emit spans in the same unit.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import AlignmentError, DimensionError, WordNotFoundError
from .vecmath import WordVector, mean_pool


@dataclass(frozen=True)
class CharSpan:
    """Half-open character range [start, end)."""

    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise AlignmentError(f"invalid span [{self.start}, {self.end})")


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int
    vector: WordVector


@dataclass(frozen=True)
class ContextEmbedding:
    """Ordered per-token vectors for one context.

    Construction enforces: spans strictly increasing and non-overlapping,
    in-bounds for the context text, and one shared vector dimension.
    """

    context_text: str
    tokens: tuple[Token, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        prev_end = 0
        dim = None
        for tok in self.tokens:
            if not (0 <= tok.start < tok.end <= len(self.context_text)):
                raise AlignmentError(
                    f"token {tok.text!r} span [{tok.start}, {tok.end}) out of bounds "
                    f"for context of length {len(self.context_text)}"
                )
            if tok.start < prev_end:
                raise AlignmentError(
                    f"token {tok.text!r} span [{tok.start}, {tok.end}) overlaps or reorders"
                )
            prev_end = tok.end
            if dim is None:
                dim = tok.vector.dim
            elif tok.vector.dim != dim:
                raise DimensionError(
                    f"token {tok.text!r} has dim {tok.vector.dim}, expected {dim}"
                )

    @property
    def dim(self) -> int | None:
        return self.tokens[0].vector.dim if self.tokens else None


def _case_insensitive_find(context: str, form: str) -> int:
    lowered = context.lower()
    if len(lowered) == len(context):
        return lowered.find(form.lower())
    # Lowercasing shifted offsets (rare); fall back to window comparison.
    target = form.lower()
    for i in range(len(context) - len(form) + 1):
        if context[i : i + len(form)].lower() == target:
            return i
    return -1


def locate_occurrence(context: str, surface_form: str) -> CharSpan:
    """Span of the first exact occurrence, else the first
    case-insensitive occurrence, of surface_form in context."""
    if not surface_form:
        raise WordNotFoundError("empty surface form")
    pos = context.find(surface_form)
    if pos < 0:
        pos = _case_insensitive_find(context, surface_form)
    if pos < 0:
        raise WordNotFoundError(f"surface form {surface_form!r} not found in context {context!r}")
    return CharSpan(pos, pos + len(surface_form))


def span_to_tokens(span: CharSpan, embedding: ContextEmbedding) -> list[int]:
    """Indices of tokens overlapping the span by at least one character."""
    covered = [
        i
        for i, tok in enumerate(embedding.tokens)
        if tok.start < span.end and tok.end > span.start
    ]
    if not covered:
        raise AlignmentError(
            f"no token overlaps span [{span.start}, {span.end}) "
            f"in context {embedding.context_text!r}"
        )
    return covered


def extract_word_vector(embedding: ContextEmbedding, surface_form: str) -> WordVector:
    """Mean-pooled vector of the tokens covering the surface form.

    Deterministic; a single-token cover returns that token's vector
    exactly.
    """
    span = locate_occurrence(embedding.context_text, surface_form)
    indices = span_to_tokens(span, embedding)
    return mean_pool([embedding.tokens[i].vector for i in indices])
