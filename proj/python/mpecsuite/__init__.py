"""Solvers for quadratic programs with linear complementarity constraints."""

import json

from ._core import (
    Instance,
    MpecError,
    b_stationarity_residual,
    default_x0,
    feasible_objective,
    is_stationary,
    lh_star_is_homeomorphism,
    lower_solve,
    objective,
    phi,
    run_cli,
    solve_lcp,
)
from . import _core

ALGORITHMS = ("pipa", "pipa-lcp", "implicit", "psqp")

__all__ = [
    "ALGORITHMS",
    "Instance",
    "MpecError",
    "b_stationarity_residual",
    "default_x0",
    "feasible_objective",
    "is_stationary",
    "lh_star_is_homeomorphism",
    "load",
    "lower_solve",
    "objective",
    "oracle",
    "phi",
    "run_cli",
    "solve",
    "solve_lcp",
]


def load(path):
    """Read and validate an instance file."""
    return Instance.load(str(path))


def solve(instance, algo="pipa-lcp", x0=None, **params):
    """Run one solver; returns the report as a dict (trace rows under "trace")."""
    return json.loads(_core.solve_json(algo, instance, x0, json.dumps(params)))


def oracle(instance):
    """Global optimum by enumerating complementary pieces (LCP form, small m)."""
    return json.loads(_core.oracle_json(instance))
