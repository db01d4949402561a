"""IMEX time integration with adaptive stepping and blow-up detection.

One first-order step treats the diffusion (and the optional hyperviscous
regularization eps * Lambda^1.75) implicitly through the diagonal multiplier
1 / (1 + dt * (|k|^alpha + eps * |k|^1.75)), which is unconditionally stable,
and the dealiased transport plus the logistic reaction explicitly.

Adaptive runs halve dt when a step is rejected (sup-norm jump above 2x,
negative overshoot beyond -1e-8 of the sup norm, or a non-finite state) and
grow dt by 1.2x after ten accepted steps, capped at ten times the initial
step.  Negative overshoot rejects rather than clips, so positivity failures
stay visible.  Genuine blow-up is declared only when the hard caps trip or
when dt reaches dt_min with the rejection guard still firing; a step size
that degenerates below the time resolution without the guard firing is a
step-size underflow.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field as dc_field
from enum import Enum
from pathlib import Path

import numpy as np

from .diagnostics import DIAGNOSTICS_CSV_COLUMNS, DiagnosticsRecord, collect, s_exponent
from .grid import FLOAT_FORMAT, Field, NonFiniteFieldError, TorusGrid, field_to_csv
from .operators import (
    DriftVariant,
    dealias_keep_mask,
    derivative_symbol,
    drift_symbol,
    heat_symbol,
    mollify,
)

__all__ = [
    "ModelParams",
    "SolverConfig",
    "Outcome",
    "Trajectory",
    "rhs_explicit",
    "step_imex",
    "detect_blowup",
    "run",
    "save_trajectory",
]

_HYPERVISCOSITY_ORDER = 1.75
_GROWTH_FACTOR = 1.2
_GROWTH_EVERY = 10
_GROWTH_CAP = 10.0
_JUMP_FACTOR = 2.0
_UNDERSHOOT_TOL = 1e-8


class Outcome(Enum):
    COMPLETED = "COMPLETED"
    BLOWUP_DETECTED = "BLOWUP_DETECTED"
    DT_UNDERFLOW = "DT_UNDERFLOW"


@dataclass(frozen=True)
class ModelParams:
    """Full instance of the drift-diffusion model.

    alpha    diffusion order, in (0, 2]
    beta     drift kernel order, > 0 (2 recovers the classical chemotaxis drift)
    chi      chemosensitivity, >= 0
    r        logistic strength, >= 0
    epsilon  hyperviscous regularization strength, >= 0 (0 disables the term)
    variant  which elliptic problem defines the potential
    """

    alpha: float
    beta: float = 2.0
    chi: float = 0.0
    r: float = 0.0
    epsilon: float = 0.0
    variant: DriftVariant = DriftVariant.HELMHOLTZ

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"diffusion order alpha must lie in (0, 2], got {self.alpha}")
        if self.beta <= 0.0:
            raise ValueError(f"drift order beta must be > 0, got {self.beta}")
        if self.chi < 0.0:
            raise ValueError(f"chemosensitivity chi must be >= 0, got {self.chi}")
        if self.r < 0.0:
            raise ValueError(f"logistic strength r must be >= 0, got {self.r}")
        if self.epsilon < 0.0:
            raise ValueError(f"regularization epsilon must be >= 0, got {self.epsilon}")
        if not isinstance(self.variant, DriftVariant):
            raise ValueError(f"variant must be a DriftVariant, got {self.variant!r}")

    @property
    def s_exp(self) -> float:
        return s_exponent(self.chi, self.r)

    @property
    def alpha_star_strong(self) -> float:
        """Diffusion threshold 1 - r/chi above which solutions stay smooth."""
        if self.chi <= 0.0:
            return 0.0
        return max(1.0 - self.r / self.chi, 0.0)

    @property
    def alpha_star_weak(self) -> float:
        """Weak-solution threshold 1 - s in the strong-aggregation case, else 0."""
        if self.chi > 0.0 and self.r < self.chi / 2.0:
            return 1.0 - s_exponent(self.chi, self.r)
        return 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        d = dict(d)
        d["variant"] = DriftVariant(d.get("variant", "helmholtz"))
        return cls(**d)


@dataclass(frozen=True)
class SolverConfig:
    n: int
    dt_init: float
    t_end: float
    adapt: bool = True
    dt_min: float = 1e-9
    record_every: int = 10
    blowup_linf: float = 1e6
    blowup_tail: float = 0.1
    mollify_ic_eps: float = 0.0

    def __post_init__(self) -> None:
        if self.dt_init <= 0.0:
            raise ValueError(f"dt_init must be > 0, got {self.dt_init}")
        if self.t_end <= 0.0:
            raise ValueError(f"t_end must be > 0, got {self.t_end}")
        if self.dt_min <= 0.0 or self.dt_min > self.dt_init:
            raise ValueError(f"dt_min must lie in (0, dt_init], got {self.dt_min}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if self.mollify_ic_eps < 0.0:
            raise ValueError(f"mollify_ic_eps must be >= 0, got {self.mollify_ic_eps}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SolverConfig":
        return cls(**d)


@dataclass
class Trajectory:
    params: ModelParams
    config: SolverConfig
    records: list[DiagnosticsRecord]
    outcome: Outcome
    final_field: Field
    u0_digest: str = ""

    @property
    def completed(self) -> bool:
        return self.outcome is Outcome.COMPLETED

    @property
    def t_final(self) -> float:
        return self.records[-1].t


class _Stepper:
    """Precomputed multipliers for repeated steps on one grid."""

    def __init__(self, grid: TorusGrid, params: ModelParams):
        self.grid = grid
        self.params = params
        ak = grid.abs_wavenumbers
        self.decay = ak**params.alpha + params.epsilon * ak**_HYPERVISCOSITY_ORDER
        self.drift_sym = drift_symbol(grid, params.beta, params.variant)
        self.ddx_dealias = derivative_symbol(grid) * dealias_keep_mask(grid)

    def rhs_hat(self, u: np.ndarray, u_hat: np.ndarray) -> np.ndarray:
        """Transform of the explicit part: transport (dealiased) plus reaction."""
        p = self.params
        rhs = np.zeros_like(u_hat)
        if p.chi != 0.0:
            b = np.fft.ifft(self.drift_sym * u_hat).real
            rhs = p.chi * (self.ddx_dealias * np.fft.fft(u * b))
        if p.r != 0.0:
            rhs = rhs + np.fft.fft(p.r * u * (1.0 - u))
        return rhs

    def step_hat(self, u: np.ndarray, u_hat: np.ndarray, dt: float) -> np.ndarray:
        return (u_hat + dt * self.rhs_hat(u, u_hat)) / (1.0 + dt * self.decay)


def rhs_explicit(u: Field, params: ModelParams) -> Field:
    """Explicit right-hand side: chi * d/dx(dealias(u B(u))) + r u (1 - u)."""
    u.require_finite()
    stepper = _Stepper(u.grid, params)
    rhs = stepper.rhs_hat(u.values, np.fft.fft(u.values))
    return Field(u.grid, np.fft.ifft(rhs).real)


def step_imex(u: Field, dt: float, params: ModelParams) -> Field:
    """One IMEX step; a non-finite result signals blow-up to the caller."""
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    u.require_finite()
    stepper = _Stepper(u.grid, params)
    new_hat = stepper.step_hat(u.values, np.fft.fft(u.values), dt)
    return Field(u.grid, np.fft.ifft(new_hat).real)


def detect_blowup(
    u: Field,
    rec: DiagnosticsRecord,
    cfg: SolverConfig,
    prev_record: DiagnosticsRecord | None = None,
) -> bool:
    """Blow-up proxy: non-finite state, sup-norm cap, or a persistent spectral tail.

    The tail criterion fires only on two consecutive records above the cap, so
    a single marginally-resolved transient does not kill a run.
    """
    if rec.blowup or not u.is_finite:
        return True
    if rec.lp_inf > cfg.blowup_linf:
        return True
    if (
        rec.spectral_tail > cfg.blowup_tail
        and prev_record is not None
        and prev_record.spectral_tail > cfg.blowup_tail
    ):
        return True
    return False


def _reject_reason(u_old: np.ndarray, u_new: np.ndarray) -> str | None:
    if not np.isfinite(u_new).all():
        return "nonfinite"
    linf_old = float(np.max(np.abs(u_old)))
    linf_new = float(np.max(np.abs(u_new)))
    if linf_new > _JUMP_FACTOR * max(linf_old, 1e-300):
        return "jump"
    scale = max(linf_old, linf_new)
    # Overshoot means the step drove the minimum below tolerance AND below the
    # state it started from; rejecting a recovering step would freeze time and
    # keep diffusion from lifting an inherited boundary-level trough.
    min_new = float(np.min(u_new))
    min_old = float(np.min(u_old))
    if min_new < -_UNDERSHOOT_TOL * scale and min_new < min_old - 1e-14 * scale:
        return "negative"
    return None


def run(u0: Field, params: ModelParams, config: SolverConfig) -> Trajectory:
    """Integrate to t_end, or until blow-up is detected or dt underflows."""
    grid = u0.grid
    if grid.n != config.n:
        raise ValueError(f"initial data lives on n={grid.n} but the config says n={config.n}")
    u0.require_finite()
    if float(np.min(u0.values)) < -1e-10:
        raise ValueError(f"initial data must be nonnegative, min value is {np.min(u0.values):.3e}")
    digest = hashlib.sha256(u0.values.tobytes()).hexdigest()

    work = mollify(u0, config.mollify_ic_eps) if config.mollify_ic_eps > 0.0 else u0
    stepper = _Stepper(grid, params)

    u = work.values.copy()
    u_hat = np.fft.fft(u)
    t = 0.0
    dt = config.dt_init
    dt_cap = _GROWTH_CAP * config.dt_init
    t_tol = 1e-12 * config.t_end

    records = [collect(Field(grid, u), 0.0, params)]
    outcome: Outcome | None = None
    last_finite = u.copy()
    since_record = 0
    accepted = 0

    if detect_blowup(Field(grid, u), records[0], config):
        outcome = Outcome.BLOWUP_DETECTED

    while outcome is None and t < config.t_end - t_tol:
        dt_step = min(dt, config.t_end - t)
        new_hat = stepper.step_hat(u, u_hat, dt_step)
        u_new = np.fft.ifft(new_hat).real

        if config.adapt:
            reason = _reject_reason(u, u_new)
            if reason is not None:
                dt *= 0.5
                if dt < config.dt_min:
                    # guard still firing at the smallest step: declare blow-up
                    outcome = Outcome.BLOWUP_DETECTED
                continue
            if t + dt_step == t:
                outcome = Outcome.DT_UNDERFLOW
                break
        elif not np.isfinite(u_new).all():
            records.append(collect(Field(grid, u_new), t + dt_step, params))
            outcome = Outcome.BLOWUP_DETECTED
            break

        t += dt_step
        u, u_hat = u_new, new_hat
        last_finite = u
        accepted += 1
        since_record += 1

        if since_record >= config.record_every or t >= config.t_end - t_tol:
            rec = collect(Field(grid, u), t, params)
            records.append(rec)
            since_record = 0
            if detect_blowup(Field(grid, u), rec, config, prev_record=records[-2]):
                outcome = Outcome.BLOWUP_DETECTED
                break

        if config.adapt and accepted % _GROWTH_EVERY == 0:
            dt = min(dt * _GROWTH_FACTOR, dt_cap)

    if outcome is None:
        outcome = Outcome.COMPLETED if t >= config.t_end - t_tol else Outcome.DT_UNDERFLOW

    return Trajectory(
        params=params,
        config=config,
        records=records,
        outcome=outcome,
        final_field=Field(grid, last_finite),
        u0_digest=digest,
    )


def _content_hash(params: ModelParams, config: SolverConfig, u0_digest: str) -> str:
    payload = json.dumps(
        {"params": params.to_dict(), "config": config.to_dict(), "u0": u0_digest},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()


def save_trajectory(traj: Trajectory, out_root: str | Path) -> Path:
    """Persist a trajectory as metadata JSON + records CSV + final-field CSV.

    The run directory is named by a content hash of (params, config, initial
    data digest), so identical runs land in identical paths.
    """
    digest = _content_hash(traj.params, traj.config, traj.u0_digest)
    run_dir = Path(out_root) / digest[:16]
    run_dir.mkdir(parents=True, exist_ok=True)
    meta = {
        "params": traj.params.to_dict(),
        "config": traj.config.to_dict(),
        "outcome": traj.outcome.value,
        "u0_digest": traj.u0_digest,
        "content_hash": digest,
        "t_final": traj.t_final,
        "n_records": len(traj.records),
    }
    (run_dir / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    rows = [DIAGNOSTICS_CSV_COLUMNS] + [rec.to_csv_row() for rec in traj.records]
    (run_dir / "records.csv").write_text("\n".join(rows) + "\n")
    field_to_csv(traj.final_field, run_dir / "final_field.csv")
    return run_dir
