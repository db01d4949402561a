"""Scalar functionals tracked along trajectories.

Lebesgue and homogeneous Sobolev norms, the entropy, Fisher information, the
dissipation pairings, and the per-time record type persisted by the solver.
All quadrature is the rectangle rule, which is exact for the discrete measure
dx on a uniform periodic grid.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, fields

import numpy as np

from .grid import FLOAT_FORMAT, Field, TWO_PI
from .operators import dealias_keep_mask, fractional_laplacian

__all__ = [
    "DiagnosticsRecord",
    "DIAGNOSTICS_CSV_COLUMNS",
    "lp_norm",
    "entropy",
    "fisher_information",
    "homogeneous_sobolev",
    "dissipation_pairing",
    "entropy_dissipation_pairing",
    "spectral_tail_fraction",
    "s_exponent",
    "collect",
]

_log = logging.getLogger(__name__)

# Tiny negative values are attributed to transform round-off and clamped;
# anything below this is a genuine sign violation and raises.
_NEGATIVITY_TOL = 1e-12


def _clamped_nonnegative(f: Field, what: str) -> np.ndarray:
    f.require_finite()
    lo = float(np.min(f.values))
    if lo < -_NEGATIVITY_TOL:
        raise ValueError(f"{what} requires a nonnegative field, min value is {lo:.3e}")
    if lo < 0.0:
        _log.debug("%s: clamping negative round-off of magnitude %.3e to zero", what, -lo)
    return np.maximum(f.values, 0.0)


def lp_norm(f: Field, p: float) -> float:
    """Lebesgue norm on the torus; p = inf returns max |f|."""
    f.require_finite()
    if math.isinf(p):
        return float(np.max(np.abs(f.values)))
    if p < 1:
        raise ValueError(f"Lebesgue exponent must be >= 1 or inf, got {p}")
    return float((np.sum(np.abs(f.values) ** p) * f.grid.dx) ** (1.0 / p))


def entropy(f: Field) -> float:
    """Entropy integral of u*log(u) - u + 1; nonnegative for u >= 0.

    The integrand vanishes at u = 1 and 0*log(0) is taken as 0 by continuity.
    """
    u = _clamped_nonnegative(f, "entropy")
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = np.where(u > 0.0, u * np.log(u), 0.0) - u + 1.0
    return float(np.sum(integrand) * f.grid.dx)


def fisher_information(f: Field) -> float:
    """Squared half-derivative L2 norm, sum of |k| |c_k|^2 under the fixed normalization."""
    f.require_finite()
    spec = np.fft.fft(f.values)
    return float(TWO_PI / f.grid.n**2 * np.sum(f.grid.abs_wavenumbers * np.abs(spec) ** 2))


def homogeneous_sobolev(f: Field, order: float) -> float:
    """Homogeneous Sobolev seminorm of the given order (L2 norm of the order-power)."""
    f.require_finite()
    if order < 0:
        raise ValueError(f"seminorm order must be >= 0, got {order}")
    spec = np.fft.fft(f.values)
    return float(
        math.sqrt(
            TWO_PI / f.grid.n**2
            * np.sum(f.grid.abs_wavenumbers ** (2.0 * order) * np.abs(spec) ** 2)
        )
    )


def dissipation_pairing(f: Field, s: float, alpha: float) -> float:
    """Pairing of u^s with the order-alpha diffusion; nonnegative up to round-off."""
    if not 0.0 < s <= 1.0:
        raise ValueError(f"pairing exponent must lie in (0, 1], got {s}")
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"diffusion order must lie in (0, 2), got {alpha}")
    u = _clamped_nonnegative(f, "dissipation_pairing")
    lam = fractional_laplacian(f, alpha).values
    return float(np.sum(u**s * lam) * f.grid.dx)


def entropy_dissipation_pairing(f: Field, alpha: float) -> float:
    """Pairing of the shifted diffusion with log(u + 1); nonnegative up to round-off."""
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"diffusion order must lie in (0, 2), got {alpha}")
    u = _clamped_nonnegative(f, "entropy_dissipation_pairing")
    lam = fractional_laplacian(f, alpha).values  # constants are annihilated, so u and u+1 agree
    return float(np.sum(lam * np.log1p(u)) * f.grid.dx)


def spectral_tail_fraction(f: Field) -> float:
    """Fraction of squared-coefficient energy above the dealiasing cutoff |k| > n/3."""
    f.require_finite()
    en = np.abs(np.fft.fft(f.values)) ** 2
    total = float(np.sum(en))
    if total == 0.0:
        return 0.0
    return float(np.sum(en[~dealias_keep_mask(f.grid)]) / total)


def s_exponent(chi: float, r: float) -> float:
    """Integrability exponent min(r/(chi - r), 1) when chi > r, else 1."""
    if chi > r:
        return min(r / (chi - r), 1.0)
    return 1.0


@dataclass
class DiagnosticsRecord:
    """One row of trajectory diagnostics at simulation time t.

    ``lp_1ps`` and ``lp_2ps`` are the L^(1+s) and L^(2+s) norms at the
    parameter-derived exponent stored in ``s_exp``.  A record with the
    ``blowup`` flag set carries NaNs in every functional that could not be
    evaluated on a non-finite state.
    """

    t: float
    mass: float
    lp1: float
    lp_1ps: float
    lp2: float
    lp_2ps: float
    lp_inf: float
    entropy: float
    hs_half_alpha: float
    dissipation_pairing: float
    min_u: float
    max_u: float
    spectral_tail: float
    s_exp: float
    blowup: bool = False

    @property
    def lp_norms(self) -> dict[float, float]:
        return {
            1.0: self.lp1,
            1.0 + self.s_exp: self.lp_1ps,
            2.0: self.lp2,
            2.0 + self.s_exp: self.lp_2ps,
            math.inf: self.lp_inf,
        }

    def to_csv_row(self) -> str:
        parts = []
        for fld in fields(self):
            val = getattr(self, fld.name)
            parts.append(str(int(val)) if fld.name == "blowup" else FLOAT_FORMAT % val)
        return ",".join(parts)

    @classmethod
    def from_csv_row(cls, row: str) -> "DiagnosticsRecord":
        parts = row.split(",")
        names = [fld.name for fld in fields(cls)]
        if len(parts) != len(names):
            raise ValueError(f"expected {len(names)} columns, got {len(parts)}")
        kwargs = {}
        for name, part in zip(names, parts):
            kwargs[name] = bool(int(part)) if name == "blowup" else float(part)
        return cls(**kwargs)

    def to_json_dict(self) -> dict:
        return {fld.name: getattr(self, fld.name) for fld in fields(self)}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


DIAGNOSTICS_CSV_COLUMNS = ",".join(fld.name for fld in fields(DiagnosticsRecord))


def collect(f: Field, t: float, params) -> DiagnosticsRecord:
    """Populate a full diagnostics record; non-finite fields get a blow-up record."""
    s = s_exponent(params.chi, params.r)
    if not f.is_finite:
        nan = float("nan")
        finite = f.values[np.isfinite(f.values)]
        return DiagnosticsRecord(
            t=t, mass=nan, lp1=nan, lp_1ps=nan, lp2=nan, lp_2ps=nan,
            lp_inf=nan, entropy=nan, hs_half_alpha=nan, dissipation_pairing=nan,
            min_u=float(np.min(finite)) if finite.size else nan,
            max_u=float(np.max(finite)) if finite.size else nan,
            spectral_tail=nan, s_exp=s, blowup=True,
        )
    lo = float(np.min(f.values))
    hi = float(np.max(f.values))
    clamped = Field(f.grid, np.maximum(f.values, 0.0))
    if 0.0 < s and 0.0 < params.alpha < 2.0:
        pairing = dissipation_pairing(clamped, s, params.alpha)
    elif s == 0.0:
        pairing = 0.0  # u^0 pairs the diffusion with a constant, which it annihilates
    else:
        pairing = float("nan")
    return DiagnosticsRecord(
        t=t,
        mass=lp_norm(f, 1.0),
        lp1=lp_norm(f, 1.0),
        lp_1ps=lp_norm(f, 1.0 + s),
        lp2=lp_norm(f, 2.0),
        lp_2ps=lp_norm(f, 2.0 + s),
        lp_inf=lp_norm(f, math.inf),
        entropy=entropy(clamped),
        hs_half_alpha=homogeneous_sobolev(f, params.alpha / 2.0),
        dissipation_pairing=pairing,
        min_u=lo,
        max_u=hi,
        spectral_tail=spectral_tail_fraction(f),
        s_exp=s,
        blowup=False,
    )
