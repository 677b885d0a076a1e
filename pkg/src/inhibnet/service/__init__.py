"""HTTP service exposing the simulation and analysis pipelines.

The application is plain ASGI; the command-line client mounts it
in-process by default, and `uvicorn inhibnet.service:app` serves it over
the network.
"""

from .app import app, create_app

__all__ = ["app", "create_app"]
