"""FastAPI application speaking the cosim embedding wire protocol.

POST /embed
    request:  {"texts": [{"id": str, "text": str}], "language": str}
    response: {"dimension": D, "items": [{"id": str, "tokens": [
                  {"t": str, "s": int, "e": int, "v": [D floats]}]}]}
GET /health
    {"status": "ok", "model": str}; 503 until models are loaded.

Status codes: 400 malformed JSON or protocol violation, 413 oversize
batch or over-length text, 422 text whose tokenization cannot be mapped
back to character offsets, 500 model failure.
"""
from __future__ import annotations

import json
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .encoders import OffsetReconstructionError, build_encoder

DEFAULT_TRACK = "default"


@dataclass
class ServiceConfig:
    models: dict[str, str] = field(default_factory=lambda: {DEFAULT_TRACK: "ref:32"})
    max_batch: int = 64
    max_text_len: int = 4000

    def __post_init__(self):
        if DEFAULT_TRACK not in self.models:
            raise ValueError(f"config needs a {DEFAULT_TRACK!r} model")
        if self.max_batch < 1:
            raise ValueError(f"max_batch must be >= 1, got {self.max_batch}")
        for track, spec in self.models.items():
            if not spec:
                raise ValueError(f"empty model id for track {track!r}")


class EncoderPool:
    """Loads one encoder per track; all must share a dimension."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.encoders = {}
        self.dimension: int | None = None

    @property
    def loaded(self) -> bool:
        return bool(self.encoders)

    def load(self) -> None:
        for track, spec in self.config.models.items():
            encoder = build_encoder(spec)
            if self.dimension is None:
                self.dimension = encoder.dimension
            elif encoder.dimension != self.dimension:
                raise ValueError(
                    f"track {track!r} model {spec!r} has dimension {encoder.dimension}, "
                    f"but the service already serves dimension {self.dimension}; one "
                    f"service instance serves exactly one dimension"
                )
            self.encoders[track] = encoder

    def for_language(self, language: str):
        return self.encoders.get(language, self.encoders[DEFAULT_TRACK])


def _problem(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"detail": message})


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    pool = EncoderPool(config)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        pool.load()
        yield

    app = FastAPI(title="cosim embedding service", lifespan=lifespan)
    app.state.pool = pool

    @app.get("/health")
    def health():
        if not pool.loaded:
            return _problem(503, "model not yet loaded")
        return {"status": "ok", "model": pool.encoders[DEFAULT_TRACK].model_id}

    @app.post("/embed")
    async def embed(request: Request):
        if not pool.loaded:
            return _problem(503, "model not yet loaded")
        try:
            payload = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            return _problem(400, f"malformed JSON: {exc}")

        if not isinstance(payload, dict):
            return _problem(400, "request body must be a JSON object")
        texts = payload.get("texts")
        language = payload.get("language")
        if not isinstance(texts, list):
            return _problem(400, "'texts' must be a list")
        if not isinstance(language, str) or not language:
            return _problem(400, "'language' must be a nonempty string")
        if len(texts) > config.max_batch:
            return _problem(413, f"batch of {len(texts)} exceeds limit {config.max_batch}")

        seen_ids = set()
        for entry in texts:
            if (
                not isinstance(entry, dict)
                or not isinstance(entry.get("id"), str)
                or not isinstance(entry.get("text"), str)
            ):
                return _problem(400, "every texts entry needs string 'id' and 'text'")
            if entry["id"] in seen_ids:
                return _problem(400, f"duplicate text id {entry['id']!r}")
            seen_ids.add(entry["id"])
            if len(entry["text"]) > config.max_text_len:
                return _problem(
                    413, f"text {entry['id']!r} exceeds {config.max_text_len} characters"
                )

        encoder = pool.for_language(language)
        items = []
        for entry in texts:
            try:
                tokens = encoder.encode(entry["text"])
            except OffsetReconstructionError as exc:
                return _problem(422, f"text {entry['id']!r}: {exc}")
            except Exception as exc:  # model/runtime failure
                return _problem(500, f"model failure on text {entry['id']!r}: {exc}")
            items.append({"id": entry["id"], "tokens": tokens})
        return {"dimension": pool.dimension, "items": items}

    return app
