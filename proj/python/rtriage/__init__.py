"""Reentrancy detection for Solidity with false-positive triage."""

import json

from . import _rtriage
from ._rtriage import __version__, cause_names, normalized_hash, run_cli

__all__ = [
    "__version__",
    "analyze_source",
    "analyze_files",
    "bench",
    "cause_names",
    "normalized_hash",
    "run_cli",
]


def analyze_source(text, path="<input>", rules=None, call_kinds=None, report_bare=True, timeout=120.0,
                   timestamp=None):
    """Analyze one Solidity source text and return the report as a dict."""
    return json.loads(_rtriage.analyze_source(text, path, rules, call_kinds, report_bare, timeout, timestamp))


def analyze_files(paths, rules=None, call_kinds=None, report_bare=True, timeout=120.0, workers=1, timestamp=None):
    """Analyze Solidity files and return the report as a dict."""
    paths = [str(p) for p in paths]
    return json.loads(_rtriage.analyze_files(paths, rules, call_kinds, report_bare, timeout, workers, timestamp))


def bench(corpus_dir, labels, rules=None, call_kinds=None, report_bare=True, timeout=120.0, workers=1):
    """Run a labeled corpus and return the metrics as a dict."""
    return json.loads(_rtriage.bench(str(corpus_dir), str(labels), rules, call_kinds, report_bare, timeout, workers))
