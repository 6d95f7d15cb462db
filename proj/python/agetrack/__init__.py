"""Python access to the agetrack memory aging harness.

Packages, run configs, traces and metrics are plain dicts mirroring the JSON
files the CLI writes.
"""

import json

from . import _agetrack
from ._agetrack import (
    BackendError,
    ConfigError,
    LookupError,
    ParseError,
    ValidationError,
    dep_recall,
    half_life,
    keyword_score,
    last_number,
    ols_slope,
    parse_sentinels,
    scenario_ids,
    window_delta,
)

__version__ = _agetrack.version()

__all__ = [
    "BackendError",
    "ConfigError",
    "LookupError",
    "ParseError",
    "ValidationError",
    "attribution_profile",
    "default_run_config",
    "dep_recall",
    "generate",
    "half_life",
    "keyword_score",
    "last_number",
    "metrics_from_trace",
    "ols_slope",
    "package_digest",
    "parse_sentinels",
    "run",
    "run_to_dir",
    "scenario_ids",
    "window_delta",
]


def _dump(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def generate(scenario, seed=0, n_sessions=10, preset="medium", dials=None, maintenance_session=None,
             emit_sentinels=True):
    """Generate a run package as a dict."""
    text = _agetrack.generate_package(scenario, seed, n_sessions, preset, dict(dials or {}), maintenance_session,
                                      emit_sentinels)
    return json.loads(text)


def package_digest(package):
    return _agetrack.package_digest(_dump(package))


def default_run_config():
    return json.loads(_agetrack.default_run_config())


def run(package, config=None):
    """Run a package; returns (trace records, summary)."""
    trace, summary = _agetrack.run_package(_dump(package), _dump(config if config is not None else {}))
    return [json.loads(line) for line in trace.splitlines() if line], json.loads(summary)


def run_to_dir(package, config, directory, command="python"):
    """Run a package and write the same run directory as `agetrack run`."""
    return json.loads(_agetrack.run_to_dir(_dump(package), _dump(config), str(directory), command))


def metrics_from_trace(package, trace):
    """Recompute run metrics from trace records (list of dicts or JSONL text)."""
    text = trace if isinstance(trace, str) else "\n".join(json.dumps(r) for r in trace)
    return json.loads(_agetrack.metrics_from_trace(_dump(package), text))


def attribution_profile(p1, p2, p3, abstained=False):
    return json.loads(_agetrack.attribution_profile(p1, p2, p3, abstained))
