"""Command-line front end.

Subcommands: ``solve`` (one run on a synthetic instance), ``experiment``
(preset or JSON-spec grid), ``lower-bound`` (the small-subsample failure
demo), ``verify`` (the verification suite), and ``threshold`` (prints the
subsample-size thresholds for given parameters).

Exit codes: 0 success, 1 invalid arguments or parameters, 2 verification
hard-check failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import QkaczmarzError
from .experiments import (
    PRESETS,
    preset,
    run_experiment,
    run_lower_bound_demo,
    run_verification_suite,
    spec_from_json,
)
from .quantiles import (
    FULL_SAMPLE,
    WITH_REPLACEMENT,
    WITHOUT_REPLACEMENT,
    QuantileSpec,
)
from .rng import RngHandle
from .solvers import SolverConfig, run_qrk, write_trace_csv
from .systems import CorruptionSpec, generate_system
from .theory import disaster_probability, max_subsample_lower, min_subsample_upper

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; this tool reserves 2 for
    # failed verification checks, so remap usage errors to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_subsample(value: str) -> "int | None":
    if value.lower() == "full":
        return None
    return int(value)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qkaczmarz",
        description="Quantile-filtered randomized Kaczmarz solvers and experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[], help="run one solver on a synthetic instance")
    p.add_argument("--m", type=int, default=5000, help="equations (default 5000)")
    p.add_argument("--n", type=int, default=50, help="unknowns (default 50)")
    p.add_argument("--beta", type=float, default=0.01, help="corrupted fraction")
    p.add_argument("--q", type=float, default=0.5, help="quantile level")
    p.add_argument(
        "--D", type=_parse_subsample, default=40,
        help="subsample size, or 'full' (default 40)",
    )
    p.add_argument("--T", type=int, default=None, help="iterations (default 200*n)")
    p.add_argument(
        "--mode", choices=[WITH_REPLACEMENT, WITHOUT_REPLACEMENT],
        default=WITH_REPLACEMENT, help="subsampling mode",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", type=Path, default=None, metavar="OUT.CSV",
                   help="write the per-step trace here")

    p = sub.add_parser("experiment", help="run a preset or JSON-spec experiment grid")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=list(PRESETS))
    src.add_argument("--spec", type=Path, metavar="SPEC.JSON")
    p.add_argument("--output", type=Path, default=None, help="override output dir")
    p.add_argument("--jobs", type=int, default=None, help="worker processes")
    p.add_argument("--shared-instance", action="store_true",
                   help="reuse one instance per corruption level across trials")

    p = sub.add_parser("lower-bound", help="small-subsample failure demo")
    p.add_argument("--m", type=int, default=5000)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--D", type=int, default=1)
    p.add_argument("--T", type=int, default=10_000)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--magnitude", type=float, default=1e6)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--output", type=Path, default=Path("verify-out"))
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("threshold", help="print subsample-size thresholds")
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--c0", type=float, default=0.5)
    p.add_argument("--C1", type=float, default=None,
                   help="guarantee constant (default 24/(1-q))")

    return parser


def _cmd_solve(args) -> int:
    T = args.T if args.T is not None else 200 * args.n
    system = generate_system(
        args.m, args.n, CorruptionSpec(beta=args.beta), RngHandle(args.seed)
    )
    if args.D is None:
        spec = QuantileSpec(args.q, mode=FULL_SAMPLE)
    else:
        spec = QuantileSpec(args.q, size=args.D, mode=args.mode)
    config = SolverConfig(
        quantile=spec,
        iterations=T,
        seed=RngHandle(args.seed),
        record_trace=args.trace is not None,
        oracle_flags=True,
    )
    trace = run_qrk(system, config)
    if args.trace is not None:
        write_trace_csv(trace, args.trace)
        print(f"trace written to {args.trace}")
    print(f"m={args.m} n={args.n} beta={args.beta} q={args.q} "
          f"D={'full' if args.D is None else args.D} T={T} seed={args.seed}")
    print(f"final error: {trace.final_error:.6e}")
    print(f"jump events: {trace.jump_count}")
    last = trace.last_corrupted_projection
    print(f"last corrupted projection: {'none' if last is None else last}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    if args.preset is not None:
        spec = preset(args.preset)
    else:
        spec = spec_from_json(args.spec.read_text())
    overrides = {}
    if args.output is not None:
        overrides["output_dir"] = str(args.output)
    if args.jobs is not None:
        overrides["jobs"] = args.jobs
    if args.shared_instance:
        overrides["shared_instance"] = True
    if overrides:
        import dataclasses

        spec = dataclasses.replace(spec, **overrides)
    curves = run_experiment(spec)
    out_root = Path(spec.output_dir) / spec.name
    for c in curves:
        print(
            f"beta={c.beta:g} D={'full' if c.D is None else c.D} mode={c.mode}: "
            f"final mean error {c.mean_error[-1]:.6e}, "
            f"jump fraction {c.jump_fraction:.2f}"
        )
    print(f"artifacts under {out_root}")
    return EXIT_OK


def _cmd_lower_bound(args) -> int:
    report = run_lower_bound_demo(
        m=args.m, n=args.n, beta=args.beta, D=args.D, T=args.T,
        magnitude=args.magnitude, trials=args.trials, base_seed=args.seed,
        q=args.q,
    )
    print(f"m={report.m} n={report.n} beta={report.beta} D={report.D} "
          f"T={report.T} magnitude={report.magnitude:g} trials={report.trials}")
    print(f"reported c0: {report.c0_reported:.4f}")
    print(f"failure floor (squared error): {report.floor_value:.6e}")
    print(f"fraction of trials above floor: {report.fraction_above_floor:.2f}")
    print(f"fraction with corrupted projection in last {report.window} steps: "
          f"{report.late_fraction:.2f}")
    for t, (err, kstar) in enumerate(zip(report.final_errors, report.kstars)):
        print(f"  trial {t}: final error {err:.6e}, "
              f"last corrupted projection {'none' if kstar is None else kstar}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    reports, hard_ok = run_verification_suite(args.output, seed=args.seed)
    width = max(len(r.check_name) for r in reports)
    for r in reports:
        status = "pass" if r.passed else "FAIL"
        print(f"{r.check_name:<{width}}  {status}  "
              f"violations {r.violations}/{r.trials}  bound {r.theoretical_bound:.3e}")
    print(f"report written to {Path(args.output) / 'verification.csv'}")
    if not hard_ok:
        print("hard check failed", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _cmd_threshold(args) -> int:
    lo = min_subsample_upper(args.q, args.beta, args.T, args.C1)
    hi = max_subsample_lower(args.beta, args.T, args.c0)
    print(f"q={args.q} beta={args.beta} T={args.T}")
    print(f"guarantee needs subsample size >= {lo}")
    print(f"failure regime applies up to size <= {hi} (c0={args.c0})")
    print(f"disaster probability at D={hi}: {disaster_probability(args.beta, hi):.3e}")
    if hi < lo:
        print("note: the two regimes leave a gap; sizes in between are uncharted")
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "experiment": _cmd_experiment,
    "lower-bound": _cmd_lower_bound,
    "verify": _cmd_verify,
    "threshold": _cmd_threshold,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except QkaczmarzError as exc:
        print(f"qkaczmarz: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qkaczmarz: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
