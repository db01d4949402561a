"""Named initial-condition families used by the CLI, sweeps, and tests.

Families are parsed from ``name`` or ``name:amplitude`` strings:

* ``cosine:a``  ->  1 + a*cos(x)
* ``bump:a``    ->  concentrated positive bump a*(1+cos x)^8 / normalizer,
                    normalized so the mean is exactly a
* ``expcos``    ->  exp(cos x)
"""

from __future__ import annotations

import math

import numpy as np

from .grid import Field, TorusGrid

__all__ = ["IC_FAMILIES", "make_initial_condition", "bump_normalizer"]

_BUMP_EXPONENT = 8


def bump_normalizer(m: int = _BUMP_EXPONENT) -> float:
    """Mean of (1 + cos x)^m over the torus: binom(2m, m) / 2^m."""
    return math.comb(2 * m, m) / 2.0**m


def _cosine(grid: TorusGrid, a: float) -> np.ndarray:
    return 1.0 + a * np.cos(grid.x)


def _bump(grid: TorusGrid, a: float) -> np.ndarray:
    return a * (1.0 + np.cos(grid.x)) ** _BUMP_EXPONENT / bump_normalizer()


def _expcos(grid: TorusGrid) -> np.ndarray:
    return np.exp(np.cos(grid.x))


IC_FAMILIES = {
    "cosine": (_cosine, True),
    "bump": (_bump, True),
    "expcos": (_expcos, False),
}


def make_initial_condition(spec: str, grid: TorusGrid) -> Field:
    """Build a field from an ``ic`` specifier like ``cosine:0.1`` or ``expcos``."""
    name, _, param = spec.partition(":")
    if name not in IC_FAMILIES:
        known = ", ".join(sorted(IC_FAMILIES))
        raise ValueError(f"unknown initial condition family {name!r} (known: {known})")
    fn, takes_amplitude = IC_FAMILIES[name]
    if takes_amplitude:
        if not param:
            raise ValueError(f"initial condition {name!r} needs an amplitude, e.g. {name}:1.0")
        try:
            a = float(param)
        except ValueError:
            raise ValueError(f"bad amplitude {param!r} for initial condition {name!r}") from None
        return Field(grid, fn(grid, a))
    if param:
        raise ValueError(f"initial condition {name!r} takes no parameter, got {param!r}")
    return Field(grid, fn(grid))
