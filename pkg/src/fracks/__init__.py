"""Pseudospectral laboratory for a fractional drift-diffusion equation with
logistic damping on the one-dimensional torus.

The package provides the grid/field data model, spectral operators, real-space
quadrature oracles, trajectory diagnostics, an IMEX time integrator with
blow-up detection, executable verification suites for the model's inequalities,
and the ``fracks`` command-line interface.
"""

__version__ = "0.1.0"

from .grid import (  # noqa: F401
    Field,
    NonFiniteFieldError,
    Spectrum,
    SpectrumSymmetryError,
    TorusGrid,
    extrema,
    from_spectrum,
    mean,
    to_spectrum,
)
from .operators import (  # noqa: F401
    DriftVariant,
    dealias,
    drift,
    fractional_laplacian,
    hilbert,
    mollify,
    solve_potential,
)
from .oracle import QuadratureSpec  # noqa: F401
from .evolution import (  # noqa: F401
    ModelParams,
    Outcome,
    SolverConfig,
    Trajectory,
    detect_blowup,
    rhs_explicit,
    run,
    save_trajectory,
    step_imex,
)
from .diagnostics import DiagnosticsRecord, collect  # noqa: F401
from .initial_conditions import make_initial_condition  # noqa: F401
from .verification import VerdictReport  # noqa: F401
