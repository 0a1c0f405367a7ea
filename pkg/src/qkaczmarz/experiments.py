"""Experiment orchestration: convergence grids, the small-subsample failure
demo, and the verification suite.

An :class:`ExperimentSpec` names a grid (corruption levels x subsample sizes
x sampling modes x trials); ``run_experiment`` executes it, writes one trace
CSV per run, an aggregate ``curves.csv``, two SVG figures (error vs
iteration, error vs mean cumulative solver time), and a JSON manifest, then
returns the aggregate curves.

Every run's seed is a keyed hash of (base_seed, beta, D, mode, trial), so
the grid is reproducible run-by-run and embarrassingly parallel: workers own
their instance and trace, and aggregation reduces in sorted grid order so a
worker pool cannot change output bytes.  Wall-clock columns are the one
exception to byte-reproducibility; they are measurements.
"""

from __future__ import annotations

import csv
import json
import math
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, EmptyInput, InvalidSpec
from .quantiles import (
    FULL_SAMPLE,
    WITH_REPLACEMENT,
    WITHOUT_REPLACEMENT,
    QuantileSpec,
    subsampled_residual_quantile,
    uncorrupted_quantile,
)
from .rng import RngHandle, check_distinct_seeds, derive_seed
from .solvers import SolverConfig, detect_jumps, run_qrk, write_trace_csv
from .svgplot import CurveSeries, emit_svg
from .systems import (
    FIRST_ROWS,
    UNIFORM_RANDOM,
    CorruptionSpec,
    FixedMagnitude,
    LinearSystem,
    Magnitude,
    SignedFixed,
    UniformInterval,
    generate_system,
)
from .theory import TheoryParams
from .verify import (
    MonteCarloReport,
    make_report,
    power_sigma_max,
    spectral_check,
    verify_chernoff_grid,
    verify_subquantile_lower,
    verify_subquantile_upper,
    write_report_csv,
)

_SAMPLING_MODES = (WITH_REPLACEMENT, WITHOUT_REPLACEMENT)


def _d_tag(D: int | None) -> str:
    return "full" if D is None else str(D)


@dataclass(frozen=True)
class ExperimentSpec:
    """A convergence-experiment grid.  ``D_grid`` entries are subsample
    sizes; None means the full-sample variant."""

    name: str
    m: int
    n: int
    q: float
    beta_grid: tuple[float, ...]
    D_grid: tuple[int | None, ...]
    T: int
    trials: int
    placement: str = FIRST_ROWS
    magnitude: Magnitude = field(default_factory=UniformInterval)
    sampling_modes: tuple[str, ...] = (WITH_REPLACEMENT,)
    base_seed: int = 1729
    output_dir: str = "out"
    shared_instance: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if not self.name or any(c in self.name for c in "/\\ \t\n"):
            raise InvalidSpec(f"name {self.name!r} must be nonempty and path-safe")
        if not (self.m >= self.n >= 1):
            raise InvalidSpec(f"need m >= n >= 1, got m={self.m}, n={self.n}")
        if not 0.0 < self.q < 1.0:
            raise InvalidSpec("q must lie in (0, 1)")
        if self.T < 1 or self.trials < 1:
            raise InvalidSpec("T and trials must be >= 1")
        object.__setattr__(self, "beta_grid", tuple(float(b) for b in self.beta_grid))
        object.__setattr__(
            self, "D_grid", tuple(None if d is None else int(d) for d in self.D_grid)
        )
        object.__setattr__(self, "sampling_modes", tuple(self.sampling_modes))
        if not self.beta_grid or not self.D_grid or not self.sampling_modes:
            raise InvalidSpec("beta_grid, D_grid, sampling_modes must be nonempty")
        for b in self.beta_grid:
            if not 0.0 <= b < 1.0:
                raise InvalidSpec(f"beta {b} outside [0, 1)")
        for d in self.D_grid:
            if d is not None and not 1 <= d <= self.m:
                raise InvalidSpec(f"subsample size {d} outside [1, m]")
        for mode in self.sampling_modes:
            if mode not in _SAMPLING_MODES:
                raise InvalidSpec(f"sampling mode {mode!r} unknown")
        if self.placement not in (FIRST_ROWS, UNIFORM_RANDOM):
            raise InvalidSpec(f"placement {self.placement!r} unknown")
        if not 0 <= self.base_seed < 2**64:
            raise InvalidSpec("base_seed must be an unsigned 64-bit integer")
        if self.jobs < 1:
            raise InvalidSpec("jobs must be >= 1")


_MAGNITUDE_KINDS = {
    "uniform_interval": UniformInterval,
    "fixed_magnitude": FixedMagnitude,
    "signed_fixed": SignedFixed,
}


def _magnitude_to_json(mag: Magnitude) -> dict:
    if isinstance(mag, UniformInterval):
        return {"kind": "uniform_interval", "lo": mag.lo, "hi": mag.hi}
    if isinstance(mag, FixedMagnitude):
        return {"kind": "fixed_magnitude", "value": mag.value}
    if isinstance(mag, SignedFixed):
        return {"kind": "signed_fixed", "value": mag.value}
    raise InvalidSpec(f"unknown magnitude {mag!r}")


def _magnitude_from_json(obj: dict) -> Magnitude:
    try:
        kind = obj["kind"]
        cls = _MAGNITUDE_KINDS[kind]
        kwargs = {k: v for k, v in obj.items() if k != "kind"}
        return cls(**kwargs)
    except (KeyError, TypeError) as exc:
        raise InvalidSpec(f"bad magnitude object {obj!r}") from exc


def spec_to_json(spec: ExperimentSpec) -> str:
    payload = {
        "name": spec.name,
        "m": spec.m,
        "n": spec.n,
        "q": spec.q,
        "beta_grid": list(spec.beta_grid),
        "D_grid": [_d_tag(d) if d is None else d for d in spec.D_grid],
        "T": spec.T,
        "trials": spec.trials,
        "placement": spec.placement,
        "magnitude": _magnitude_to_json(spec.magnitude),
        "sampling_modes": list(spec.sampling_modes),
        "base_seed": spec.base_seed,
        "output_dir": str(spec.output_dir),
        "shared_instance": spec.shared_instance,
        "jobs": spec.jobs,
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def spec_from_json(text: str) -> ExperimentSpec:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"spec is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InvalidSpec("spec JSON must be an object")
    try:
        d_grid = tuple(
            None if d == "full" else int(d) for d in obj.pop("D_grid")
        )
        magnitude = _magnitude_from_json(obj.pop("magnitude"))
        return ExperimentSpec(D_grid=d_grid, magnitude=magnitude, **obj)
    except InvalidSpec:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"bad spec fields: {exc}") from exc


def preset(name: str) -> ExperimentSpec:
    """Named experiment grids.

    ``fig1``/``fig2`` run at full scale (m=50000, n=100, T=20000);
    ``small-fig1``/``small-fig2`` shrink to (m=5000, n=50, T=10000) for CI.
    fig1 varies the subsample size at low corruption under both sampling
    modes; fig2 sweeps corruption level against small subsample sizes, the
    regime where jumps appear.
    """
    if name == "fig1":
        return ExperimentSpec(
            name="fig1", m=50_000, n=100, q=0.5, beta_grid=(0.01,),
            D_grid=(4, 40, 5000, None), T=20_000, trials=10,
            sampling_modes=(WITH_REPLACEMENT, WITHOUT_REPLACEMENT),
        )
    if name == "small-fig1":
        return ExperimentSpec(
            name="small-fig1", m=5000, n=50, q=0.5, beta_grid=(0.01,),
            D_grid=(4, 40, 1000, None), T=10_000, trials=10,
            sampling_modes=(WITH_REPLACEMENT, WITHOUT_REPLACEMENT),
        )
    if name == "fig2":
        return ExperimentSpec(
            name="fig2", m=50_000, n=100, q=0.5,
            beta_grid=(0.01, 0.06, 0.11), D_grid=(4, 8, 12),
            T=20_000, trials=10,
        )
    if name == "small-fig2":
        return ExperimentSpec(
            name="small-fig2", m=5000, n=50, q=0.5,
            beta_grid=(0.01, 0.06, 0.11), D_grid=(4, 8, 12),
            T=10_000, trials=10,
        )
    raise InvalidSpec(f"unknown preset {name!r}")


PRESETS = ("fig1", "small-fig1", "fig2", "small-fig2")


@dataclass(frozen=True)
class AggregateCurve:
    """Mean convergence behavior of one (beta, D, mode) grid cell.

    One entry per recorded step: ``mean_error[j]`` is the mean over trials
    of the error after step k = j + 1, and ``mean_cum_wall_ns`` is the mean
    cumulative solver wall time through that step.  ``first_jumps`` holds
    each trial's first error-jump step, inf for trials without one.
    """

    beta: float
    D: int | None
    mode: str
    trials: int
    mean_error: np.ndarray
    mean_cum_wall_ns: np.ndarray
    jump_fraction: float
    first_jump_median: float
    first_jumps: tuple[float, ...]

    @property
    def key(self) -> tuple[float, str, str]:
        return (self.beta, _d_tag(self.D), self.mode)


def _run_seeds(spec: ExperimentSpec) -> dict[tuple, int]:
    seeds = {}
    for beta in spec.beta_grid:
        for D in spec.D_grid:
            for mode in spec.sampling_modes:
                for trial in range(spec.trials):
                    key = (beta, _d_tag(D), mode, trial)
                    seeds[key] = derive_seed(
                        spec.base_seed, beta, _d_tag(D), mode, trial
                    )
    check_distinct_seeds(seeds)
    return seeds


def _quantile_spec(q: float, D: int | None, mode: str) -> QuantileSpec:
    if D is None:
        return QuantileSpec(q, mode=FULL_SAMPLE)
    return QuantileSpec(q, size=D, mode=mode)


def _single_run(args: tuple) -> tuple:
    """One grid cell trial; module-level so process pools can pickle it.

    Returns (key, trial, per-step error curve, per-step cumulative wall,
    jump count, first jump step or inf).  Writes the per-trial trace CSV as
    a side effect when a path is given.
    """
    (spec_fields, beta, D, mode, trial, run_seed, instance_seed, trace_path) = args
    m, n, q, T, placement, magnitude = spec_fields
    corruption = CorruptionSpec(beta=beta, placement=placement, magnitude=magnitude)
    system = generate_system(m, n, corruption, RngHandle(instance_seed))
    config = SolverConfig(
        quantile=_quantile_spec(q, D, mode),
        iterations=T,
        seed=RngHandle(run_seed),
        record_trace=True,
        trace_stride=1,
        oracle_flags=True,
    )
    trace = run_qrk(system, config)
    if trace_path is not None:
        write_trace_csv(trace, trace_path)
    errors = np.array([r.error for r in trace.records], dtype=np.float64)
    cum_wall = np.cumsum(
        np.array([r.wall_time_ns for r in trace.records], dtype=np.float64)
    )
    flagged = detect_jumps(trace)
    first_jump = float(flagged[0]) if flagged else math.inf
    return (
        (beta, _d_tag(D), mode),
        trial,
        errors,
        cum_wall,
        trace.jump_count,
        first_jump,
    )


def _source_revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True,
            text=True,
            timeout=10,
            cwd=Path(__file__).parent,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


CURVES_COLUMNS = ("beta", "D", "mode", "k", "mean_error", "mean_cum_wall_ns")


def write_curves_csv(curves: list[AggregateCurve], path: "str | Path") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVES_COLUMNS)
        for c in curves:
            beta_s = format(c.beta, ".17g")
            d_s = _d_tag(c.D)
            for j in range(len(c.mean_error)):
                writer.writerow(
                    [
                        beta_s,
                        d_s,
                        c.mode,
                        j + 1,
                        format(c.mean_error[j], ".17g"),
                        format(c.mean_cum_wall_ns[j], ".17g"),
                    ]
                )


def read_curves_csv(path: "str | Path") -> dict[tuple, dict[str, np.ndarray]]:
    """Aggregate curves keyed by (beta, D-tag, mode), arrays ordered by k."""
    rows: dict[tuple, list[tuple[int, float, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CURVES_COLUMNS:
            raise ValueError(f"unexpected curves header {header!r}")
        for row in reader:
            key = (float(row[0]), row[1], row[2])
            rows.setdefault(key, []).append(
                (int(row[3]), float(row[4]), float(row[5]))
            )
    out = {}
    for key, triples in rows.items():
        triples.sort()
        out[key] = {
            "mean_error": np.array([t[1] for t in triples]),
            "mean_cum_wall_ns": np.array([t[2] for t in triples]),
        }
    return out


def _curve_label(beta: float, d_tag: str, mode: str) -> str:
    suffix = " (w/o repl)" if mode == WITHOUT_REPLACEMENT else ""
    return f"beta={beta:g} D={d_tag}{suffix}"


def run_experiment(spec: ExperimentSpec) -> list[AggregateCurve]:
    """Execute the grid, write all artifacts under output_dir/name, and
    return the aggregate curves in grid order."""
    out_root = Path(spec.output_dir) / spec.name
    trials_dir = out_root / "trials"
    trials_dir.mkdir(parents=True, exist_ok=True)

    seeds = _run_seeds(spec)
    spec_fields = (spec.m, spec.n, spec.q, spec.T, spec.placement, spec.magnitude)
    tasks = []
    for beta in spec.beta_grid:
        for D in spec.D_grid:
            for mode in spec.sampling_modes:
                for trial in range(spec.trials):
                    key = (beta, _d_tag(D), mode, trial)
                    run_seed = seeds[key]
                    if spec.shared_instance:
                        instance_seed = derive_seed(spec.base_seed, "instance", beta)
                    else:
                        instance_seed = run_seed
                    trace_path = trials_dir / (
                        f"trace_beta{beta:g}_D{_d_tag(D)}_{mode}_t{trial}.csv"
                    )
                    tasks.append(
                        (spec_fields, beta, D, mode, trial, run_seed,
                         instance_seed, str(trace_path))
                    )

    if spec.jobs == 1:
        results = [_single_run(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = list(pool.map(_single_run, tasks))

    # Deterministic ordered reduction: group by cell, sort trials.
    by_key: dict[tuple, list[tuple]] = {}
    for key, trial, errors, cum_wall, jump_count, first_jump in results:
        by_key.setdefault(key, []).append(
            (trial, errors, cum_wall, jump_count, first_jump)
        )
    curves: list[AggregateCurve] = []
    for beta in spec.beta_grid:
        for D in spec.D_grid:
            for mode in spec.sampling_modes:
                cell = sorted(by_key[(beta, _d_tag(D), mode)])
                errs = np.vstack([c[1] for c in cell])
                walls = np.vstack([c[2] for c in cell])
                jumps = [c[3] for c in cell]
                firsts = tuple(float(c[4]) for c in cell)
                curves.append(
                    AggregateCurve(
                        beta=beta,
                        D=D,
                        mode=mode,
                        trials=spec.trials,
                        mean_error=errs.mean(axis=0),
                        mean_cum_wall_ns=walls.mean(axis=0),
                        jump_fraction=sum(1 for j in jumps if j > 0) / spec.trials,
                        first_jump_median=float(np.median(firsts)),
                        first_jumps=firsts,
                    )
                )

    write_curves_csv(curves, out_root / "curves.csv")
    emit_aggregate_svg(curves, out_root / "curves.svg", axes="iteration")
    emit_aggregate_svg(curves, out_root / "curves_time.svg", axes="runtime")

    manifest = {
        "name": spec.name,
        "spec": json.loads(spec_to_json(spec)),
        "revision": _source_revision(),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    (out_root / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return curves


def emit_aggregate_svg(
    curves: list[AggregateCurve],
    path: "str | Path",
    axes: str = "iteration",
    log_y: bool = True,
) -> None:
    """Figure from aggregate curves: error vs iteration, or error vs mean
    cumulative solver wall time.  Without-replacement curves are dashed."""
    if not curves:
        raise EmptyInput("no curves to plot")
    series = []
    for c in curves:
        if axes == "iteration":
            x = np.arange(1, len(c.mean_error) + 1, dtype=np.float64)
            x_label = "iteration"
        elif axes == "runtime":
            x = c.mean_cum_wall_ns / 1e6
            x_label = "mean cumulative solver time (ms)"
        else:
            raise DomainError(f"axes must be 'iteration' or 'runtime', got {axes!r}")
        series.append(
            CurveSeries(
                label=_curve_label(c.beta, _d_tag(c.D), c.mode),
                x=x,
                y=c.mean_error,
                dashed=(c.mode == WITHOUT_REPLACEMENT),
            )
        )
    emit_svg(
        series,
        path,
        title="mean error over trials",
        x_label=x_label,
        y_label="error",
        log_y=log_y,
    )


@dataclass(frozen=True)
class LowerBoundReport:
    """Outcome of the small-subsample failure demo.

    ``floor_value`` is (1/2)^floor(n/ln n) * magnitude^2, the squared-error
    level the failure statement keeps trials above; ``window`` is
    ceil(n/ln n), the tail length within which a final corrupted projection
    certifies the failure event; ``c0_reported`` is the constant that makes
    the subsample-size precondition D <= max_subsample_lower hold exactly.
    """

    m: int
    n: int
    beta: float
    D: int
    T: int
    q: float
    magnitude: float
    trials: int
    c0_reported: float
    floor_value: float
    window: int
    final_errors: tuple[float, ...]
    kstars: tuple[int | None, ...]
    fraction_above_floor: float
    late_fraction: float


def run_lower_bound_demo(
    m: int,
    n: int,
    beta: float,
    D: int,
    T: int,
    magnitude: float,
    trials: int,
    base_seed: int,
    q: float = 0.5,
) -> LowerBoundReport:
    """Run the regime where quantile screening provably cannot help: a
    subsample small enough that all-corrupted draws keep recurring.

    Corruptions have fixed magnitude and random signs.  A zero magnitude
    makes the failure floor zero and the demo vacuous; it is accepted and
    produces an uncorrupted instance.
    """
    if magnitude < 0:
        raise DomainError("magnitude must be nonnegative")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if magnitude == 0.0:
        corruption = CorruptionSpec(beta=0.0)
    else:
        corruption = CorruptionSpec(
            beta=beta, placement=FIRST_ROWS, magnitude=FixedMagnitude(magnitude)
        )
    window = math.ceil(n / math.log(n))
    floor_value = 0.5 ** math.floor(n / math.log(n)) * magnitude**2
    c0_reported = D * math.log(2.0 / beta) / math.log(T) if beta > 0 else math.inf

    seeds = {t: derive_seed(base_seed, "lower_bound", t) for t in range(trials)}
    check_distinct_seeds(seeds)

    finals: list[float] = []
    kstars: list[int | None] = []
    for t in range(trials):
        system = generate_system(m, n, corruption, RngHandle(seeds[t]))
        config = SolverConfig(
            quantile=QuantileSpec(q, size=D, mode=WITH_REPLACEMENT),
            iterations=T,
            seed=RngHandle(seeds[t]),
            record_trace=False,
            oracle_flags=True,
        )
        trace = run_qrk(system, config)
        finals.append(trace.final_error)
        kstars.append(trace.last_corrupted_projection)

    above = sum(1 for e in finals if e**2 >= floor_value)
    late = sum(1 for k in kstars if k is not None and k >= T - window)
    return LowerBoundReport(
        m=m, n=n, beta=beta, D=D, T=T, q=q,
        magnitude=magnitude, trials=trials,
        c0_reported=c0_reported,
        floor_value=floor_value,
        window=window,
        final_errors=tuple(finals),
        kstars=tuple(kstars),
        fraction_above_floor=above / trials,
        late_fraction=late / trials,
    )


ALL_CHECKS = (
    "chernoff",
    "fullsample_sandwich",
    "restricted_chain",
    "subsampled_mc",
    "fullsample_reduction",
    "spectral",
)

_SUITE_M, _SUITE_N, _SUITE_BETA, _SUITE_Q = 2000, 20, 0.05, 0.5


def _suite_instance(seed: int) -> tuple[LinearSystem, np.ndarray]:
    """A verification instance plus a random iterate at a random scale, so
    the sandwich checks see residual spreads from many epochs of a run."""
    system = generate_system(
        _SUITE_M,
        _SUITE_N,
        CorruptionSpec(beta=_SUITE_BETA),
        RngHandle(seed),
    )
    gen = RngHandle(seed, stream_id=3).generator()
    direction = gen.standard_normal(_SUITE_N)
    direction /= np.linalg.norm(direction)
    radius = 10.0 ** gen.uniform(-3.0, 3.0)
    x = system.truth + radius * direction
    return system, x


def run_verification_suite(
    output_dir: "str | Path",
    seed: int = 0,
    checks: tuple[str, ...] = ALL_CHECKS,
) -> tuple[list[MonteCarloReport], bool]:
    """Run the verification grid, write verification.csv, and return the
    reports plus whether every hard check passed.

    The grid: exact Chernoff dominance up to N=30; the deterministic
    full-sample sandwich and the restricted-quantile chain on 100 random
    instances; subsampled-quantile Monte Carlo at D in {10, 20, 40} with
    10^4 draws per side; the full-sample reduction of the same checks; and
    spectral scale estimates.  The spectral floor row is advisory (the bound
    holds with high probability, not surely); everything else is hard.
    """
    for c in checks:
        if c not in ALL_CHECKS:
            raise DomainError(f"unknown check {c!r}")
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports: list[MonteCarloReport] = []
    hard_ok = True

    def hard(report: MonteCarloReport) -> None:
        nonlocal hard_ok
        reports.append(report)
        hard_ok = hard_ok and report.passed

    if "chernoff" in checks:
        grid = verify_chernoff_grid(30)
        hard(
            make_report(
                "chernoff_dominance", "N<=30 r=0.05..0.95", grid.cells,
                grid.violations, 0.0,
            )
        )
        hard(
            make_report(
                "chernoff_float_agreement", "N<=30 rel=1e-9", grid.cells,
                grid.float_mismatches, 0.0,
            )
        )

    params = TheoryParams(q=_SUITE_Q, beta=_SUITE_BETA, eps_l=0.125, eps_u=0.2)
    label = f"m={_SUITE_M} n={_SUITE_N} beta={_SUITE_BETA} q={_SUITE_Q}"

    if "fullsample_sandwich" in checks:
        lo_bad = hi_bad = 0
        for i in range(100):
            system, x = _suite_instance(derive_seed(seed, "suite_instance", i))
            observed = subsampled_residual_quantile(
                system, x, QuantileSpec(_SUITE_Q, mode=FULL_SAMPLE),
                RngHandle(0).generator(),
            )
            if observed < uncorrupted_quantile(system, x, _SUITE_Q - _SUITE_BETA):
                lo_bad += 1
            if observed > uncorrupted_quantile(system, x, _SUITE_Q + _SUITE_BETA):
                hi_bad += 1
        hard(make_report("fullsample_sandwich_lower", label, 100, lo_bad, 0.0))
        hard(make_report("fullsample_sandwich_upper", label, 100, hi_bad, 0.0))

    if "restricted_chain" in checks:
        level = _SUITE_Q - _SUITE_BETA - params.eps_l
        bad = 0
        for i in range(100):
            system, x = _suite_instance(derive_seed(seed, "suite_instance", i))
            whole = uncorrupted_quantile(system, x, level)
            clean = uncorrupted_quantile(
                system, x, level / (1.0 - _SUITE_BETA),
                restrict=system.uncorrupted_set(),
            )
            if whole > clean:
                bad += 1
        hard(make_report("restricted_chain", label, 100, bad, 0.0))

    if "subsampled_mc" in checks:
        system, x = _suite_instance(derive_seed(seed, "suite_instance", 0))
        for D in (10, 20, 40):
            hard(
                verify_subquantile_upper(
                    system, x, params, D, 10_000,
                    RngHandle(derive_seed(seed, "mc_upper", D)),
                )
            )
            hard(
                verify_subquantile_lower(
                    system, x, params, D, 10_000,
                    RngHandle(derive_seed(seed, "mc_lower", D)),
                )
            )

    if "fullsample_reduction" in checks:
        system, x = _suite_instance(derive_seed(seed, "suite_instance", 0))
        hard(
            verify_subquantile_upper(
                system, x, params, system.m, 1, RngHandle(0), mode=FULL_SAMPLE
            )
        )
        hard(
            verify_subquantile_lower(
                system, x, params, system.m, 1, RngHandle(0), mode=FULL_SAMPLE
            )
        )

    if "spectral" in checks:
        # Scaled spectral norm stays O(1): CI-form count over 100 instances.
        over = 0
        mismatches = 0
        for i in range(100):
            system, _ = _suite_instance(derive_seed(seed, "suite_instance", i))
            gen = RngHandle(derive_seed(seed, "power", i)).generator()
            sigma, _iters = power_sigma_max(system.rows, gen)
            scaled = sigma * math.sqrt(system.n / system.m)
            if scaled > 3.0:
                over += 1
            if i < 5:
                dense = float(
                    np.linalg.svd(system.rows, compute_uv=False)[0]
                )
                if abs(sigma - dense) > 1e-8 * dense:
                    mismatches += 1
        hard(make_report("spectral_norm_scale", label + " limit=3", 100, over, 0.01))
        hard(make_report("power_vs_svd", label + " rel=1e-8", 5, mismatches, 0.0))

        system, _ = _suite_instance(derive_seed(seed, "suite_instance", 0))
        spectral = spectral_check(
            system, alpha0=0.25, subset_trials=200,
            rng=RngHandle(derive_seed(seed, "spectral_min", 0)),
        )
        # Advisory: bound 1.0 can never fail; values ride in instance_params.
        reports.append(
            make_report(
                "spectral_floor_advisory",
                f"min_sampled={spectral.sigma_min_alpha_scaled:.6g} "
                f"floor={spectral.lemma_floor:.6g} alpha0=0.25",
                spectral.subset_trials,
                0 if spectral.above_floor else 1,
                1.0,
            )
        )

    write_report_csv(reports, out_dir / "verification.csv")
    return reports, hard_ok
