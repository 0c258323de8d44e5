"""Second-order methods for l1-regularized nonconvex problems."""

import json

import numpy as np

from ._core import (
    ConfigError,
    ContractViolation,
    EvaluationError,
    InternalError,
    Problem,
    callback_problem,
    gradient_mapping,
    quadratic_problem,
    residual_g,
    residual_g_eps,
    soft_threshold,
    student_t_problem,
    toy_problem,
)
from . import _core

SOLVERS = ("hpgncm", "pgn2cm", "fpgncm", "fpgn2cm")


def default_config(solver="pgn2cm", preset="default"):
    """Solver settings as a dict; preset is 'default', 'toy' or 'student-t'."""
    return json.loads(_core.default_config(solver, preset))


def solve(problem, x0, solver="pgn2cm", preset="default", config=None, mode="nonconvex"):
    """Run one solver from x0. `config` overrides preset fields by name."""
    overrides = json.dumps(config) if config else ""
    out = _core.solve(problem, np.asarray(x0, dtype=float), solver, preset, overrides, mode)
    out["config"] = json.loads(out["config"])
    return out


def validate_trace_file(path, config):
    """Replay a CSV trace against the sufficient-decrease tests."""
    return _core.validate_trace_file(str(path), json.dumps(config))


__all__ = [
    "ConfigError",
    "ContractViolation",
    "EvaluationError",
    "InternalError",
    "Problem",
    "SOLVERS",
    "callback_problem",
    "default_config",
    "gradient_mapping",
    "quadratic_problem",
    "residual_g",
    "residual_g_eps",
    "soft_threshold",
    "solve",
    "student_t_problem",
    "toy_problem",
    "validate_trace_file",
]
