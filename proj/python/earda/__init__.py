"""Earable activity recognition with adversarial domain adaptation."""

import json as _json

from ._core import (
    ACTIVITIES,
    Error,
    Model,
    load_checkpoint,
    load_windows,
    low_pass,
    magnitude,
    resample,
    run_cli,
    spectrum,
    synth_pack,
)
from ._core import eval_report as _eval_report

__version__ = "0.1.0"


def eval_report(truths, predictions, groups=None):
    """Metrics for integer class codes, optionally grouped by head-movement code."""
    return _json.loads(_eval_report(list(truths), list(predictions), None if groups is None else list(groups)))


__all__ = [
    "ACTIVITIES",
    "Error",
    "Model",
    "eval_report",
    "load_checkpoint",
    "load_windows",
    "low_pass",
    "magnitude",
    "resample",
    "run_cli",
    "spectrum",
    "synth_pack",
]
