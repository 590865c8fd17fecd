"""Robust spatiotemporal fusion of HR/LR satellite images.

Images are float64 numpy arrays of shape (bands, height, width).
"""

from ._rostf import *  # noqa: F401,F403
from ._rostf import __version__, runcase as _runcase

import json as _json


def runcase(case, **kwargs):
    """simulate -> fuse -> evaluate for one experimental case; returns the report dict."""
    return _json.loads(_runcase(case, **kwargs))
