"""Fourier-multiplier realizations of the model's nonlocal operators.

Every operator here is diagonal in the DFT basis, so they all commute and are
normalization-agnostic.  Odd multipliers (Hilbert transform, derivative, the
drift) zero the Nyquist slot so real fields stay real; even multipliers keep
it.  All functions are pure and safe for unlimited concurrent use.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .grid import Field, Spectrum, TorusGrid, from_spectrum, to_spectrum

__all__ = [
    "DriftVariant",
    "apply_symbol",
    "fractional_symbol",
    "hilbert_symbol",
    "derivative_symbol",
    "potential_symbol",
    "drift_symbol",
    "heat_symbol",
    "dealias_keep_mask",
    "fractional_laplacian",
    "hilbert",
    "derivative",
    "solve_potential",
    "drift",
    "mollify",
    "dealias",
]


class DriftVariant(Enum):
    """Which elliptic problem defines the chemoattractant potential v."""

    HELMHOLTZ = "helmholtz"  # v + Lambda^beta v = u
    RIESZ = "riesz"          # Lambda^beta v = u - <u>, <v> = 0


def apply_symbol(f: Field, symbol: np.ndarray) -> Field:
    """Apply a Fourier multiplier to a field.

    Every symbol built in this module is conjugate-symmetric (odd ones zero
    the Nyquist slot), so the inverse transform's imaginary part is pure
    round-off and is dropped without the symmetry check of
    :func:`fracks.grid.from_spectrum`; that check would reject legitimate
    outputs of strongly damping multipliers, whose tiny results sit below the
    input's round-off floor.
    """
    s = to_spectrum(f)
    return Field(f.grid, np.fft.ifft(s.coefficients * symbol).real)


def fractional_symbol(grid: TorusGrid, s: float) -> np.ndarray:
    """Multiplier |k|^s of the fractional Laplacian; s = 0 is the identity."""
    if s < 0:
        raise ValueError(f"fractional order must be >= 0, got {s} (use solve_potential for inverses)")
    return grid.abs_wavenumbers ** s  # 0**0 == 1, so s=0 keeps the mean


def hilbert_symbol(grid: TorusGrid) -> np.ndarray:
    """Multiplier -i*sgn(k); zero at k = 0 and at the Nyquist slot."""
    sym = -1j * np.sign(grid.wavenumbers).astype(np.complex128)
    sym[grid.nyquist_index] = 0.0
    return sym


def derivative_symbol(grid: TorusGrid) -> np.ndarray:
    """Multiplier i*k with the Nyquist slot zeroed (odd operator)."""
    sym = 1j * grid.wavenumbers.astype(np.float64)
    sym[grid.nyquist_index] = 0.0
    return sym


def potential_symbol(grid: TorusGrid, beta: float, variant: DriftVariant) -> np.ndarray:
    """Multiplier solving the potential problem of the given variant."""
    if beta <= 0:
        raise ValueError(f"potential order beta must be > 0, got {beta}")
    ak = grid.abs_wavenumbers
    if variant is DriftVariant.HELMHOLTZ:
        return 1.0 / (1.0 + ak**beta)
    if variant is DriftVariant.RIESZ:
        with np.errstate(divide="ignore"):
            sym = np.where(ak > 0, ak, 1.0) ** (-beta)
        sym[0] = 0.0  # zero-mean potential
        return sym
    raise ValueError(f"unknown drift variant {variant!r}")


def drift_symbol(grid: TorusGrid, beta: float, variant: DriftVariant) -> np.ndarray:
    """Fused multiplier of the drift: |k|^(beta-1) * (-i sgn k) * potential.

    Evaluating the composition as one multiplier keeps it bounded for every
    beta > 0 (for the Riesz variant it collapses to -i*sgn(k)/|k|), instead of
    amplifying round-off at small |k| through intermediate factors.
    """
    if beta <= 0:
        raise ValueError(f"drift order beta must be > 0, got {beta}")
    ak = grid.abs_wavenumbers
    safe = np.where(ak > 0, ak, 1.0)
    if variant is DriftVariant.HELMHOLTZ:
        mag = safe ** (beta - 1.0) / (1.0 + safe**beta)
    elif variant is DriftVariant.RIESZ:
        mag = 1.0 / safe
    else:
        raise ValueError(f"unknown drift variant {variant!r}")
    sym = -1j * np.sign(grid.wavenumbers) * mag
    sym[0] = 0.0
    sym[grid.nyquist_index] = 0.0
    return sym.astype(np.complex128)


def heat_symbol(grid: TorusGrid, eps: float) -> np.ndarray:
    """Multiplier exp(-k^2 * eps) of the periodic heat kernel at time eps."""
    if eps <= 0:
        raise ValueError(f"mollifier time must be > 0, got {eps}")
    k = grid.wavenumbers.astype(np.float64)
    return np.exp(-(k**2) * eps)


def dealias_keep_mask(grid: TorusGrid) -> np.ndarray:
    """Boolean mask keeping |k| <= n/3 (the 2/3 rule for quadratic products)."""
    return grid.abs_wavenumbers <= grid.n / 3.0


def fractional_laplacian(f: Field, s: float) -> Field:
    """Fractional Laplacian of order s >= 0; zero-mean output for s > 0."""
    return apply_symbol(f, fractional_symbol(f.grid, s))


def hilbert(f: Field) -> Field:
    """Periodic Hilbert transform; kills the mean and the Nyquist mode."""
    return apply_symbol(f, hilbert_symbol(f.grid))


def derivative(f: Field) -> Field:
    """Spectral d/dx with the Nyquist mode zeroed."""
    return apply_symbol(f, derivative_symbol(f.grid))


def solve_potential(u: Field, beta: float, variant: DriftVariant) -> Field:
    """Potential v of the density u for the given variant (beta > 0)."""
    return apply_symbol(u, potential_symbol(u.grid, beta, variant))


def drift(u: Field, beta: float, variant: DriftVariant) -> Field:
    """Chemotactic drift B(u), the (beta-1)-order odd transform of the potential."""
    return apply_symbol(u, drift_symbol(u.grid, beta, variant))


def mollify(f: Field, eps: float) -> Field:
    """Heat-kernel mollifier at time eps > 0; preserves the mean exactly.

    Nonnegativity is preserved to round-off when the kernel is resolved on the
    grid, i.e. when exp(-(n/2)^2 * eps) is negligible or eps is so small the
    multiplier is numerically the identity.
    """
    return apply_symbol(f, heat_symbol(f.grid, eps))


def dealias(s: Spectrum) -> Spectrum:
    """Zero every coefficient with |k| > n/3; idempotent."""
    return Spectrum(s.grid, s.coefficients * dealias_keep_mask(s.grid))
