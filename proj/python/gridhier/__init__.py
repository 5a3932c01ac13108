"""Hierarchical (primary/secondary/tertiary) frequency-control toolkit."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import GridhierError, run_verify as _run_verify

__version__ = "0.1.0"


def verify(scenario, seed=None):
    """Run every consistency check; returns (exit_code, report dict)."""
    code, text = _run_verify(scenario, seed)
    return code, _json.loads(text)
