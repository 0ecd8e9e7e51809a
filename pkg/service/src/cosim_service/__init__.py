from .app import ServiceConfig, create_app
from .encoders import HFEncoder, ReferenceEncoder, build_encoder

__version__ = "0.1.0"

__all__ = ["HFEncoder", "ReferenceEncoder", "ServiceConfig", "build_encoder", "create_app"]
