"""Forced mean curvature flow and causal diagnostics in warped product spacetimes."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import __version__, model_from_json as _model_from_json


def model_from_dict(doc):
    """Build a Spacetime from a dict in the model JSON schema."""
    return _model_from_json(_json.dumps(doc))
