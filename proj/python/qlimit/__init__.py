"""Driven nonlinear-cavity master equations and their two-level limits."""

import json as _json

from ._core import (  # noqa: F401
    ConfigError,
    DimensionMismatch,
    Error,
    InvalidArgument,
    InvariantViolation,
    Model,
    NumericalError,
    __version__,
    build_chi2,
    build_kerr,
    build_qubit_limit,
    build_tpa,
    compare,
    delta_B,
    integrate,
    liouvillian_apply,
    nongauss_trace,
    selftest,
    steady_state,
    vacuum,
    verify_structural,
    wigner,
)
from ._core import run_scenario as _run_scenario


def run_scenario(config, action="", out_dir="."):
    """Run a scenario JSON file; returns the manifest as a dict."""
    return _json.loads(_run_scenario(str(config), action, str(out_dir)))
