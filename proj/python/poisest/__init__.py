"""Parameter estimation for inhomogeneous Poisson processes.

Thin convenience layer over the compiled core: model loading, exact
simulation, method-of-moments and one-/two-step corrected estimators,
and the Monte Carlo study harness.
"""

import json as _json

from ._core import (
    EstimationError,
    Model,
    estimate,
    learning_size,
    load_model,
    mme,
    mme_covariance,
    moment_map,
    path_score,
    read_sample,
    simulate,
    write_sample,
)
from ._core import run_study as _run_study_raw


def model(spec):
    """Build a Model from a dict or JSON string; returns (model, theta_or_None)."""
    if not isinstance(spec, str):
        spec = _json.dumps(spec)
    return load_model(spec)


def run_study(config):
    """Run a Monte Carlo study from a dict or JSON string config.

    Returns the full report as a dict; the summary CSV is included under
    the "summary_csv" key.
    """
    if not isinstance(config, str):
        config = _json.dumps(config)
    report_json, summary_csv = _run_study_raw(config)
    report = _json.loads(report_json)
    report["summary_csv"] = summary_csv
    return report


__all__ = [
    "EstimationError",
    "Model",
    "estimate",
    "learning_size",
    "load_model",
    "mme",
    "mme_covariance",
    "model",
    "moment_map",
    "path_score",
    "read_sample",
    "run_study",
    "simulate",
    "write_sample",
]
