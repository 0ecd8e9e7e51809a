"""Run the embedding service: python -m cosim_service [options]."""
import argparse
import os

import uvicorn

from .app import DEFAULT_TRACK, ServiceConfig, create_app


def parse_models(specs: list[str]) -> dict[str, str]:
    """Each spec is MODEL or LANG=MODEL; a bare MODEL sets the default track."""
    models: dict[str, str] = {}
    for spec in specs:
        if "=" in spec:
            track, model = spec.split("=", 1)
            models[track] = model
        else:
            models[DEFAULT_TRACK] = spec
    models.setdefault(DEFAULT_TRACK, "ref:32")
    return models


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="cosim-service", description=__doc__)
    parser.add_argument(
        "--model",
        action="append",
        default=None,
        help="model spec (ref:<dim> or hf:<checkpoint>), optionally LANG=SPEC per "
        "language track; repeatable (default: $COSIM_SERVICE_MODEL or ref:32)",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=int(os.environ.get("COSIM_SERVICE_PORT", "8000")))
    parser.add_argument("--max-batch", type=int, default=64)
    parser.add_argument("--max-text-len", type=int, default=4000)
    args = parser.parse_args(argv)

    specs = args.model or [os.environ.get("COSIM_SERVICE_MODEL", "ref:32")]
    config = ServiceConfig(
        models=parse_models(specs), max_batch=args.max_batch, max_text_len=args.max_text_len
    )
    uvicorn.run(create_app(config), host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
