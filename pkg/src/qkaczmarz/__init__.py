"""Quantile-filtered randomized Kaczmarz solvers for sparsely corrupted
overdetermined linear systems, with the verification and experiment harness
behind them."""

from .errors import (
    ConvergenceFailure,
    DegenerateRow,
    DomainError,
    EmptyCurves,
    EmptyInput,
    IndexOutOfRange,
    InvalidDimension,
    InvalidSpec,
    MissingOracle,
    MissingTruth,
    QkaczmarzError,
    SeedCollision,
    SideMismatch,
    SubsampleTooLarge,
    TraceInconsistency,
)
from .estimators import KaczmarzRegressor, QuantileKaczmarzRegressor
from .experiments import (
    AggregateCurve,
    ExperimentSpec,
    LowerBoundReport,
    preset,
    run_experiment,
    run_lower_bound_demo,
    run_verification_suite,
    spec_from_json,
    spec_to_json,
)
from .quantiles import (
    FULL_SAMPLE,
    WITH_REPLACEMENT,
    WITHOUT_REPLACEMENT,
    QuantileSpec,
    draw_subsample,
    multiset_quantile,
    quantile_rank,
    subsampled_residual_quantile,
    uncorrupted_quantile,
)
from .rng import RngHandle, check_distinct_seeds, derive_seed
from .solvers import (
    IterationTrace,
    SolverConfig,
    StepRecord,
    detect_jumps,
    read_trace_csv,
    rk_step,
    run_qrk,
    run_rk,
    write_trace_csv,
)
from .systems import (
    CorruptionSpec,
    FixedMagnitude,
    LinearSystem,
    SignedFixed,
    UniformInterval,
    dump_system,
    error_norm,
    generate_system,
    load_system,
    residual,
)
from .theory import (
    LOWER,
    UPPER,
    TheoryParams,
    chernoff_tail,
    chernoff_tail_exact,
    disaster_probability,
    fast_contraction_floor,
    kl_bernoulli,
    max_subsample_lower,
    min_subsample_upper,
    phi_bound,
    quantile_bound_failure,
    union_failure_bound,
)
from .verify import (
    ChernoffGridReport,
    MonteCarloReport,
    SpectralReport,
    power_sigma_max,
    spectral_check,
    verify_chernoff_grid,
    verify_subquantile_lower,
    verify_subquantile_upper,
    write_report_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateCurve",
    "ChernoffGridReport",
    "ConvergenceFailure",
    "CorruptionSpec",
    "DegenerateRow",
    "DomainError",
    "EmptyCurves",
    "EmptyInput",
    "ExperimentSpec",
    "FixedMagnitude",
    "FULL_SAMPLE",
    "IndexOutOfRange",
    "InvalidDimension",
    "InvalidSpec",
    "IterationTrace",
    "KaczmarzRegressor",
    "LOWER",
    "LinearSystem",
    "LowerBoundReport",
    "MissingOracle",
    "MissingTruth",
    "MonteCarloReport",
    "QkaczmarzError",
    "QuantileKaczmarzRegressor",
    "QuantileSpec",
    "RngHandle",
    "SeedCollision",
    "SideMismatch",
    "SignedFixed",
    "SolverConfig",
    "SpectralReport",
    "StepRecord",
    "SubsampleTooLarge",
    "TheoryParams",
    "TraceInconsistency",
    "UPPER",
    "UniformInterval",
    "WITH_REPLACEMENT",
    "WITHOUT_REPLACEMENT",
    "check_distinct_seeds",
    "chernoff_tail",
    "chernoff_tail_exact",
    "derive_seed",
    "detect_jumps",
    "disaster_probability",
    "draw_subsample",
    "dump_system",
    "error_norm",
    "fast_contraction_floor",
    "generate_system",
    "kl_bernoulli",
    "load_system",
    "max_subsample_lower",
    "min_subsample_upper",
    "multiset_quantile",
    "phi_bound",
    "power_sigma_max",
    "preset",
    "quantile_bound_failure",
    "quantile_rank",
    "read_trace_csv",
    "residual",
    "rk_step",
    "run_experiment",
    "run_lower_bound_demo",
    "run_qrk",
    "run_rk",
    "run_verification_suite",
    "spec_from_json",
    "spec_to_json",
    "spectral_check",
    "subsampled_residual_quantile",
    "uncorrupted_quantile",
    "union_failure_bound",
    "verify_chernoff_grid",
    "verify_subquantile_lower",
    "verify_subquantile_upper",
    "write_report_csv",
    "write_trace_csv",
]
