"""Row-action solvers with per-step instrumentation.

Two iterations are implemented as small resumable state machines:

* :class:`RkState` — classical randomized Kaczmarz: project onto a uniformly
  chosen row every step.
* :class:`QrkState` — quantile-filtered Kaczmarz: each step draws a subsample
  of rows, takes the q-quantile of their absolute residuals, then projects
  onto an independently drawn row only if that row's absolute residual is at
  or below the threshold; otherwise the iterate is left untouched (bitwise).

``run_rk`` / ``run_qrk`` drive the machines for a fixed number of steps and
assemble an :class:`IterationTrace`.  Per-step wall time covers only the
sampling/quantile/projection work; oracle diagnostics (error norms, corrupted
flags, sandwich-violation flags) are computed outside the timed region.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DomainError,
    IndexOutOfRange,
    InvalidDimension,
    MissingOracle,
    MissingTruth,
    TraceInconsistency,
)
from .quantiles import (
    QuantileSpec,
    subsampled_residual_quantile,
    uncorrupted_quantile,
)
from .rng import STREAM_QUANTILE, STREAM_UPDATE, RngHandle, as_handle
from .systems import LinearSystem


@dataclass(frozen=True)
class SolverConfig:
    """Everything a run needs besides the system itself.

    ``oracle_flags`` turns on truth-dependent diagnostics (per-step error,
    jump counting); it requires a planted solution.  ``bound_eps_l`` /
    ``bound_eps_u`` additionally enable the per-step sandwich-violation
    flags, which cost a full residual sweep per iteration and therefore stay
    off unless explicitly requested.  When flags are enabled without
    ``bound_eps_l``, it falls back to q/4.
    """

    quantile: QuantileSpec | None
    iterations: int
    seed: RngHandle
    record_trace: bool = True
    trace_stride: int = 1
    oracle_flags: bool = True
    jump_factor: float = 1.5
    bound_eps_l: float | None = None
    bound_eps_u: float | None = None

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise DomainError("iterations must be >= 1")
        if self.trace_stride < 1:
            raise DomainError("trace_stride must be >= 1")
        if self.jump_factor <= 1.0:
            raise DomainError("jump_factor must exceed 1")
        object.__setattr__(self, "seed", as_handle(self.seed))

    @property
    def q(self) -> float:
        if self.quantile is None:
            raise DomainError("config has no quantile spec")
        return self.quantile.q


@dataclass(frozen=True)
class StepRecord:
    """One solver step.  Diagnostics are None when not computed."""

    k: int
    error: float | None
    accepted: bool
    update_index: int
    update_corrupted: bool
    quantile_value: float
    residual_abs: float
    upper_violation: bool | None
    lower_violation: bool | None
    wall_time_ns: int


@dataclass
class IterationTrace:
    """Outcome of a run: thinned records plus end-state summary fields.

    ``jump_count`` and ``last_corrupted_projection`` are computed over every
    step regardless of ``trace_stride``; ``last_corrupted_projection`` is
    None when no accepted step hit a corrupted row.
    """

    records: list[StepRecord]
    final_x: np.ndarray
    final_error: float | None
    jump_count: int | None
    last_corrupted_projection: int | None


def rk_step(system: LinearSystem, x: np.ndarray, i: int) -> np.ndarray:
    """Project ``x`` onto the solution hyperplane of equation ``i``."""
    if not 0 <= i < system.m:
        raise IndexOutOfRange(f"equation index {i} outside [0, {system.m})")
    row = system.rows[i]
    h = row @ x - system.rhs[i]
    return x - h * row


class _SolverState:
    """Shared driver: RNG streams, oracle bookkeeping, record assembly."""

    uses_quantile = True

    def __init__(self, system: LinearSystem, config: SolverConfig, x0=None):
        self.system = system
        self.config = config
        n = system.n
        if x0 is None:
            x = np.zeros(n)
        else:
            x = np.array(x0, dtype=np.float64, copy=True)
            if x.shape != (n,):
                raise InvalidDimension(f"x0 must have shape ({n},)")
        self.x = x
        self.k = 0
        self.update_rng = config.seed.stream(STREAM_UPDATE).generator()
        self.quantile_rng = config.seed.stream(STREAM_QUANTILE).generator()
        self._mask = system.corrupted_mask()
        self._oracle = bool(config.oracle_flags)
        if self._oracle and system.truth is None:
            raise MissingTruth("oracle diagnostics need a planted solution")
        self._flags = config.bound_eps_l is not None or config.bound_eps_u is not None
        if self._flags:
            if not self._oracle:
                raise MissingOracle("violation flags need oracle_flags enabled")
            q = config.q
            beta = system.corrupted_fraction
            eps_l = config.bound_eps_l if config.bound_eps_l is not None else q / 4.0
            eps_u = config.bound_eps_u
            if eps_u is None:
                raise DomainError("violation flags need bound_eps_u")
            if not 0.0 < eps_l < q:
                raise DomainError("need 0 < eps_l < q")
            if not 0.0 < eps_u < 1.0 - q:
                raise DomainError("need 0 < eps_u < 1 - q")
            if q + beta + eps_u >= 1.0 or q - beta - eps_l <= 0.0:
                raise DomainError("beta too large for the requested sandwich levels")
            self._upper_level = q + beta + eps_u
            self._lower_level = (q - beta - eps_l) / (1.0 - beta)
            self._clean = system.uncorrupted_set()

    # Subclasses supply the threshold for one step and may consume the
    # quantile stream; they must not touch the iterate.
    def _threshold(self) -> float:
        raise NotImplementedError

    def step(self) -> StepRecord:
        system = self.system
        A = system.rows
        b = system.rhs
        m = system.m
        flags = self._flags
        if flags:
            x_pre = self.x.copy()

        t0 = time.perf_counter_ns()
        threshold = self._threshold()
        r = int(self.update_rng.integers(0, m))
        h = float(A[r] @ self.x - b[r])
        accepted = abs(h) <= threshold
        if accepted:
            self.x = self.x - h * A[r]
        wall = time.perf_counter_ns() - t0

        err = None
        if self._oracle:
            err = float(np.linalg.norm(self.x - system.truth))
        upper = lower = None
        if flags:
            upper = threshold > uncorrupted_quantile(system, x_pre, self._upper_level)
            lower = threshold < uncorrupted_quantile(
                system, x_pre, self._lower_level, restrict=self._clean
            )
        record = StepRecord(
            k=self.k,
            error=err,
            accepted=accepted,
            update_index=r,
            update_corrupted=bool(self._mask[r]),
            quantile_value=threshold,
            residual_abs=abs(h),
            upper_violation=upper,
            lower_violation=lower,
            wall_time_ns=wall,
        )
        self.k += 1
        return record


class RkState(_SolverState):
    """Plain randomized Kaczmarz: every drawn row is projected onto."""

    uses_quantile = False

    def _threshold(self) -> float:
        return float("inf")


class QrkState(_SolverState):
    """Quantile-filtered Kaczmarz.

    Within a step the subsample is drawn before the update index, matching
    the algorithm's statement; the two draws come from independent streams,
    so a full-sample run (which consumes no quantile randomness) still walks
    the same update-row sequence.
    """

    def __init__(self, system: LinearSystem, config: SolverConfig, x0=None):
        super().__init__(system, config, x0)
        if config.quantile is None:
            raise DomainError("quantile-filtered run needs a QuantileSpec")

    def _threshold(self) -> float:
        return subsampled_residual_quantile(
            self.system, self.x, self.config.quantile, self.quantile_rng
        )


def _drive(state: _SolverState) -> IterationTrace:
    config = state.config
    system = state.system
    records: list[StepRecord] = []
    stride = config.trace_stride
    oracle = config.oracle_flags
    jump_factor = config.jump_factor
    jumps = 0
    last_corrupted: int | None = None
    prev_err: float | None = None
    for _ in range(config.iterations):
        rec = state.step()
        if rec.accepted and rec.update_corrupted:
            last_corrupted = rec.k
        if oracle:
            if prev_err is not None and rec.error > jump_factor * prev_err:
                jumps += 1
            prev_err = rec.error
        if config.record_trace and rec.k % stride == 0:
            records.append(rec)
    final_error = prev_err if oracle else None
    if oracle and final_error is None:
        # Zero-iteration runs are rejected by SolverConfig, so prev_err is set.
        final_error = float(np.linalg.norm(state.x - system.truth))
    return IterationTrace(
        records=records,
        final_x=state.x.copy(),
        final_error=final_error,
        jump_count=jumps if oracle else None,
        last_corrupted_projection=last_corrupted,
    )


def run_rk(system: LinearSystem, config: SolverConfig, x0=None) -> IterationTrace:
    """Run plain randomized Kaczmarz for ``config.iterations`` steps."""
    return _drive(RkState(system, config, x0))


def run_qrk(system: LinearSystem, config: SolverConfig, x0=None) -> IterationTrace:
    """Run quantile-filtered Kaczmarz for ``config.iterations`` steps."""
    return _drive(QrkState(system, config, x0))


def detect_jumps(trace: IterationTrace, jump_factor: float = 1.5) -> list[int]:
    """Step indices whose recorded error exceeds ``jump_factor`` times the
    previous recorded error.

    Exact when the trace was recorded at stride 1; with a coarser stride the
    comparison is between surviving records.  Every flagged step is
    cross-checked to be an accepted projection onto a corrupted row; anything
    else would contradict non-expansiveness and means the trace is corrupt.
    """
    if jump_factor <= 1.0:
        raise DomainError("jump_factor must exceed 1")
    records = trace.records
    if not records or any(r.error is None for r in records):
        raise MissingOracle("jump detection needs per-step errors in the trace")
    flagged: list[int] = []
    for prev, cur in zip(records, records[1:]):
        if cur.error > jump_factor * prev.error:
            if not (cur.accepted and cur.update_corrupted):
                raise TraceInconsistency(
                    f"error grew at step {cur.k} without a corrupted projection"
                )
            flagged.append(cur.k)
    return flagged


TRACE_COLUMNS = (
    "k",
    "error",
    "accepted",
    "update_index",
    "update_corrupted",
    "quantile_value",
    "residual_abs",
    "upper_violation",
    "lower_violation",
    "wall_time_ns",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_trace_csv(trace: IterationTrace, path: "str | Path") -> None:
    """Write the recorded steps; floats carry 17 significant digits so the
    file round-trips float64 exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for r in trace.records:
            writer.writerow(
                [
                    _fmt(r.k),
                    _fmt(r.error),
                    _fmt(r.accepted),
                    _fmt(r.update_index),
                    _fmt(r.update_corrupted),
                    _fmt(r.quantile_value),
                    _fmt(r.residual_abs),
                    _fmt(r.upper_violation),
                    _fmt(r.lower_violation),
                    _fmt(r.wall_time_ns),
                ]
            )


def read_trace_csv(path: "str | Path") -> list[StepRecord]:
    def opt_float(s: str) -> float | None:
        return None if s == "" else float(s)

    def opt_bool(s: str) -> bool | None:
        return None if s == "" else s == "1"

    records: list[StepRecord] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header {header!r}")
        for row in reader:
            records.append(
                StepRecord(
                    k=int(row[0]),
                    error=opt_float(row[1]),
                    accepted=row[2] == "1",
                    update_index=int(row[3]),
                    update_corrupted=row[4] == "1",
                    quantile_value=float(row[5]),
                    residual_abs=float(row[6]),
                    upper_violation=opt_bool(row[7]),
                    lower_violation=opt_bool(row[8]),
                    wall_time_ns=int(row[9]),
                )
            )
    return records
