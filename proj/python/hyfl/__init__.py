"""Python bindings for the hybrid federated learning simulator."""

import json

from ._core import *  # noqa: F401,F403
from ._core import RunHistory


def metadata(history: RunHistory) -> dict:
    """Run metadata (parameters, schedule, privacy audit) as a dict."""
    return json.loads(history.metadata_json)
