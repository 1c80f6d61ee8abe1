"""Python bindings for the moneystat C++ core."""

import json as _json
import os as _os

from ._core import *  # noqa: F401,F403
from ._core import __version__, _build_report, _run_experiment


def build_report(config):
    """Run a config (dict) in memory and return the report as a dict."""
    return _json.loads(_build_report(_json.dumps(config)))


def run_experiment(config, out_dir):
    """Run a config and write report.json, bulk files and manifest.json to out_dir."""
    return _json.loads(_run_experiment(_json.dumps(config), _os.fspath(out_dir)))
