"""Quasi-free CAR/CCR moments, central limits and Khintchine-type norms."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import __version__, run_json


def run(config, seed=None, jobs=None):
    """Run a batch command from a config dict (same schema as the ncq CLI)."""
    return run_json(_json.dumps(config), seed=seed, jobs=jobs)
