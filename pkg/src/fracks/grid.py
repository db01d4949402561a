"""Grid, field, and spectrum primitives for the periodic pseudospectral lab.

The spatial domain is the one-dimensional torus sampled uniformly at
``x_j = -pi + j*dx`` with ``dx = 2*pi/n``.  The transform convention is fixed
once: forward DFT unnormalized, inverse divides by ``n``, so the ``k = 0``
coefficient of a field equals ``n`` times its mean.  Wavenumbers are stored in
FFT layout with the Nyquist slot taken as ``+n/2``; odd multipliers must zero
that slot to keep real fields real.

``Field`` and ``Spectrum`` are immutable value objects (arrays are copied and
marked read-only on construction), so instances are safe to share across
threads and processes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "TWO_PI",
    "FLOAT_FORMAT",
    "TorusGrid",
    "Field",
    "Spectrum",
    "NonFiniteFieldError",
    "SpectrumSymmetryError",
    "to_spectrum",
    "from_spectrum",
    "mean",
    "extrema",
    "field_to_csv",
    "field_from_csv",
    "field_to_json",
    "field_from_json",
]

TWO_PI = 2.0 * math.pi

# CSV formatting policy: 17 significant digits round-trip IEEE doubles exactly.
FLOAT_FORMAT = "%.17g"


class NonFiniteFieldError(FloatingPointError):
    """A field contains NaN or Inf; carries the first offending index."""

    def __init__(self, index: int, value: float):
        self.index = int(index)
        self.value = float(value) if value == value else float("nan")
        super().__init__(f"non-finite value {value!r} at sample index {index}")


class SpectrumSymmetryError(ValueError):
    """Coefficients are not conjugate-symmetric: no real field exists."""


def _first_nonfinite(values: np.ndarray) -> int | None:
    bad = ~np.isfinite(values)
    if bad.any():
        return int(np.argmax(bad))
    return None


@dataclass(frozen=True)
class TorusGrid:
    """Uniform sampling of [-pi, pi) with ``n`` points.

    ``n`` must be even and at least 8: dealiasing and the Nyquist-handling
    convention both rely on it.
    """

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)):
            raise TypeError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 8:
            raise ValueError(f"grid size must be >= 8, got {self.n}")
        if self.n % 2 != 0:
            raise ValueError(f"grid size must be even, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def dx(self) -> float:
        return TWO_PI / self.n

    @cached_property
    def x(self) -> np.ndarray:
        x = -math.pi + self.dx * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer wavenumbers in FFT layout, Nyquist stored as +n/2."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)
        k[self.n // 2] = self.n // 2
        k.flags.writeable = False
        return k

    @cached_property
    def abs_wavenumbers(self) -> np.ndarray:
        a = np.abs(self.wavenumbers).astype(np.float64)
        a.flags.writeable = False
        return a

    @property
    def nyquist_index(self) -> int:
        return self.n // 2


@dataclass(frozen=True, eq=False)
class Field:
    """Real-valued samples on a :class:`TorusGrid`.

    Non-finite entries are storable (they represent a detected blow-up state)
    but every operation that declares a finite precondition raises
    :class:`NonFiniteFieldError` rather than propagating NaN silently.
    """

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ValueError(f"field values must be one-dimensional, got shape {v.shape}")
        if v.shape[0] != self.grid.n:
            raise ValueError(
                f"field length {v.shape[0]} does not match grid size {self.grid.n}"
            )
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def require_finite(self) -> None:
        idx = _first_nonfinite(self.values)
        if idx is not None:
            raise NonFiniteFieldError(idx, self.values[idx])


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex DFT coefficients of a real field, in FFT layout."""

    grid: TorusGrid
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients, dtype=np.complex128)
        if c.ndim != 1:
            raise ValueError(f"coefficients must be one-dimensional, got shape {c.shape}")
        if c.shape[0] != self.grid.n:
            raise ValueError(
                f"coefficient length {c.shape[0]} does not match grid size {self.grid.n}"
            )
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)


def to_spectrum(f: Field) -> Spectrum:
    """Forward transform (unnormalized): coefficient at k=0 is n * mean(f)."""
    f.require_finite()
    return Spectrum(f.grid, np.fft.fft(f.values))


def from_spectrum(s: Spectrum) -> Field:
    """Inverse transform (divides by n); rejects asymmetric spectra.

    An imaginary residue up to 1e-12 of the field magnitude is attributed to
    round-off and discarded; anything larger means the coefficients do not
    represent a real field.
    """
    vals = np.fft.ifft(s.coefficients)
    # Scale by the coefficients too: a multiplier may legitimately cancel the
    # field to near zero, which must not read as a symmetry violation.
    scale = max(
        float(np.max(np.abs(vals))),
        float(np.max(np.abs(s.coefficients))) / s.grid.n,
    )
    imag = float(np.max(np.abs(vals.imag)))
    if scale > 0.0 and imag > 1e-12 * scale:
        raise SpectrumSymmetryError(
            f"imaginary residue {imag:.3e} exceeds 1e-12 of field magnitude {scale:.3e}"
        )
    return Field(s.grid, vals.real)


def mean(f: Field) -> float:
    """Mean value (1/2pi) * integral of f; exact rectangle rule on the grid."""
    f.require_finite()
    return float(np.mean(f.values))


def extrema(f: Field) -> tuple[float, int, float, int]:
    """Grid-resolved extrema ``(min, argmin, max, argmax)``, ties to lowest index."""
    f.require_finite()
    imin = int(np.argmin(f.values))
    imax = int(np.argmax(f.values))
    return float(f.values[imin]), imin, float(f.values[imax]), imax


def field_to_csv(f: Field, path: str | Path) -> None:
    """Write two columns ``x,value`` with a header row."""
    lines = ["x,value"]
    for xj, vj in zip(f.grid.x, f.values):
        lines.append(f"{FLOAT_FORMAT % xj},{FLOAT_FORMAT % vj}")
    Path(path).write_text("\n".join(lines) + "\n")


def field_from_csv(path: str | Path) -> Field:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0].strip().lower() != "x,value":
        raise ValueError(f"{path}: expected header 'x,value'")
    xs, vs = [], []
    for line in lines[1:]:
        sx, sv = line.split(",")
        xs.append(float(sx))
        vs.append(float(sv))
    grid = TorusGrid(len(vs))
    if not np.allclose(xs, grid.x, rtol=0.0, atol=1e-9):
        raise ValueError(f"{path}: x column does not match the uniform grid on [-pi, pi)")
    return Field(grid, np.array(vs))


def field_to_json(f: Field) -> str:
    """Raw JSON array of samples; round-trips to <= 1e-15 relative (lossless)."""
    return json.dumps(f.values.tolist())


def field_from_json(text: str, grid: TorusGrid | None = None) -> Field:
    vals = np.asarray(json.loads(text), dtype=np.float64)
    if grid is None:
        grid = TorusGrid(len(vals))
    return Field(grid, vals)
