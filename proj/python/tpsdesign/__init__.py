"""Python access to the tpsdesign thermal film design pipeline."""

from __future__ import annotations

import json
import os
from typing import Any, Mapping

from . import _core
from ._core import (
    ConfigError,
    InvalidInput,
    IoError,
    NumericalError,
    Surrogate,
    TpsError,
    normal_cdf,
    reliability,
    z_quantile,
)

__all__ = [
    "ConfigError",
    "InvalidInput",
    "IoError",
    "NumericalError",
    "Surrogate",
    "TpsError",
    "analytic",
    "config",
    "normal_cdf",
    "reliability",
    "run",
    "solve",
    "z_quantile",
]

COMMANDS = ("solve", "analytic", "train", "validate", "sample", "verify", "bench")


def _dump(cfg: Mapping[str, Any] | None) -> str:
    return json.dumps(dict(cfg or {}))


def config(cfg: Mapping[str, Any] | None = None) -> dict:
    """Validate a (partial) configuration and return it with all defaults filled in."""
    return json.loads(_core.normalized_config(_dump(cfg)))


def run(command: str, cfg: Mapping[str, Any] | None = None, out_dir: str | os.PathLike = "out") -> dict:
    """Run a pipeline command, writing artifacts to out_dir; returns the run summary."""
    if command not in COMMANDS:
        raise InvalidInput(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    return json.loads(_core.run_command(command, _dump(cfg), os.fspath(out_dir)))


def solve(cfg: Mapping[str, Any] | None = None, rho: float = 200.0, k: float = 1.0, cp: float = 800.0):
    """Finite-difference temperature field as numpy arrays (x, t, T[t, x])."""
    return _core.solve(_dump(cfg), rho, k, cp)


def analytic(x: float, t: float, rho: float = 200.0, k: float = 1.0, cp: float = 800.0,
             cfg: Mapping[str, Any] | None = None, terms: int = 100) -> float:
    """Series solution for the constant-flux slab at one point."""
    return _core.analytic(_dump(cfg), x, t, rho, k, cp, terms)
