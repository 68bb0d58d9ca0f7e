"""Recursive tree systems on Galton-Watson trees."""

import json

from ._rts_lab import (
    Family,
    NumericError,
    System,
    ValidationError,
    crit,
    curve_csv,
    fixed_points,
    interpretable,
    is_critical,
)
from . import _rts_lab

__all__ = [
    "Family",
    "NumericError",
    "System",
    "ValidationError",
    "analyze",
    "crit",
    "curve_csv",
    "decompose",
    "estimate_admissible",
    "find_critical",
    "fixed_points",
    "interpretable",
    "is_critical",
]


def analyze(system, tol=1e-12):
    return json.loads(_rts_lab.analyze_json(system, tol))


def decompose(system):
    return json.loads(_rts_lab.decompose_json(system))


def find_critical(family, t_lo, t_hi):
    return json.loads(_rts_lab.find_critical_json(family, t_lo, t_hi))


def estimate_admissible(system, depth, trials, seed):
    return json.loads(_rts_lab.estimate_admissible_json(system, depth, trials, seed))
