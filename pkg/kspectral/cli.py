"""
kspectral command line
Subcommands: classify | certify | bounds | verify | estimate
Machine output (JSON/CSV) goes to stdout or --output, logs go to stderr
"""

from typing import List, Optional, Sequence
import argparse
import logging
import sys

import numpy as np

from bounds import curve_table, j_closed, lower_simple, thm1_upper, write_csv
from calculus import QuadratureConfig, default_battery, make_context, run_checks
from config import is_debug, settings
from errors import AmbiguousClassificationError, DomainError, KSpectralError
from estimator import (
    complete_ratio,
    jordan_witness,
    maximize_ratio,
    random_admissible,
    random_matrix_function,
)
from geometry import certify_spectral, classify, intersection_constant
from models import (
    CertificateReport,
    ClassificationReport,
    EstimateReport,
    RationalSpec,
    VerifyReport,
    load_disk,
    load_function,
    load_matrix,
)

logger = logging.getLogger(__name__)


def configure_logging() -> None:
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL.upper()),
        format=settings.LOG_FORMAT,
        stream=sys.stderr,
    )


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        logger.info(f"✅ Wrote {output}")
    else:
        sys.stdout.write(text)


def _positive_int(value: str) -> int:
    number = int(value)
    if number <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def _positive_float(value: str) -> float:
    number = float(value)
    if not number > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return number


def _power_of_two(value: str) -> int:
    number = _positive_int(value)
    if number < 64 or number & (number - 1):
        raise argparse.ArgumentTypeError(f"expected a power of 2 ≥ 64, got {value}")
    return number


def parse_range(text: str) -> List[float]:
    """'a:b:n' → n geometrically spaced values from a to b"""
    try:
        start, stop, count = text.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError as e:
        raise DomainError(f"--R-range must look like a:b:n, got {text!r}") from e
    if count < 1:
        raise DomainError(f"--R-range needs at least one point, got {count}")
    if start <= 0 or stop <= 0:
        raise DomainError(f"--R-range bounds must be positive, got {text!r}")
    return [float(x) for x in np.geomspace(start, stop, count)]


# ========================================
# Subcommands
# ========================================

def cmd_classify(args: argparse.Namespace) -> int:
    d1, d2 = load_disk(args.d1), load_disk(args.d2)
    c = classify(d1, d2, args.tol)
    report = ClassificationReport.from_classification(c, intersection_constant(c))
    logger.info(f"✅ Classified disk pair as {c.case_label.value}")
    _emit(report.model_dump_json(indent=2) + "\n", args.output)
    return 0


def cmd_certify(args: argparse.Namespace) -> int:
    cert = certify_spectral(load_disk(args.disk), load_matrix(args.matrix))
    verdict = "spectral" if cert else "not spectral"
    logger.info(f"{'✅' if cert else '⚠️ '} Disk is {verdict} (measured {cert.measured:.12g}, threshold {cert.threshold:.12g})")
    _emit(CertificateReport.from_certificate(cert).model_dump_json(indent=2) + "\n", args.output)
    return 0


def cmd_bounds(args: argparse.Namespace) -> int:
    values = parse_range(args.R_range) if args.R_range else args.R
    rows = curve_table(values, args.tail_tol)
    if args.output:
        write_csv(rows, args.output)
        logger.info(f"✅ Wrote {len(rows)} rows to {args.output}")
    else:
        write_csv(rows, sys.stdout)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    R = args.R
    if args.witness:
        # witness of the slightly smaller ring: ‖A‖ = ‖A⁻¹‖ = R(1 - 2·margin)
        a = jordan_witness(R * (1.0 - 2.0 * args.margin))
    elif args.random is not None:
        a = random_admissible(args.random, R, args.seed)
    else:
        a = load_matrix(args.matrix)

    ctx = make_context(a, R, args.margin)
    q = QuadratureConfig(nodes=args.quad_nodes, tol=args.tol, max_nodes=max(settings.QUAD_MAX_NODES, 2 * args.quad_nodes))
    battery = default_battery(ctx.R)
    if args.function:
        battery.append(("function", load_function(args.function)))
    checks = run_checks(ctx, q, battery)
    k_value = next(c.residual for c in checks if c.name == "k_envelope")
    report = VerifyReport(
        R=ctx.R,
        n=ctx.n,
        k_formula=k_value,
        k_envelope=2.0 + j_closed(ctx.R),
        checks=checks,
        passed=all(c.passed for c in checks),
    )
    _emit(report.model_dump_json(indent=2) + "\n", args.output)
    if not report.passed:
        logger.error("❌ Calculus verification failed")
        return 1
    return 0


def cmd_estimate(args: argparse.Namespace) -> int:
    R = args.R
    envelope = (lower_simple(R), thm1_upper(R))
    if args.mode == "complete":
        best, trials = 0.0, args.trials
        for trial in range(trials):
            rng = np.random.default_rng([args.seed, trial])
            a = random_admissible(args.n, R, int(rng.integers(2 ** 62)))
            F = random_matrix_function(2, args.degree, R, rng)
            best = max(best, complete_ratio(a, R, F, settings.SUP_SAMPLES))
        logger.info(f"✅ Largest complete ratio over {trials} trials: {best:.10f}")
        report = EstimateReport(R=R, mode="complete", ratio=best, converged=True,
                                seed=args.seed, envelope=envelope, trials=trials)
    else:
        a = jordan_witness(R) if args.mode == "witness" else random_admissible(args.n, R, args.seed)
        result = maximize_ratio(a, R, args.degree, args.budget, args.seed)
        report = EstimateReport(
            R=R,
            mode=args.mode,
            ratio=result.ratio,
            f=RationalSpec.from_function(result.f),
            converged=result.converged,
            seed=args.seed,
            envelope=envelope,
        )
    if report.ratio > envelope[1] + 1e-6:
        logger.warning(f"⚠️  Ratio {report.ratio:.10f} above the upper bound {envelope[1]:.10f}")
    _emit(report.model_dump_json(indent=2) + "\n", args.output)
    return 0


# ========================================
# Parser
# ========================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kspectral",
        description="K-spectral sets: disk certification, two-disk classification, annulus calculus and bounds",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="Classify the intersection of two sphere disks",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--d1", required=True, help="first disk JSON")
    p.add_argument("--d2", required=True, help="second disk JSON")
    p.add_argument("--tol", type=_positive_float, default=settings.GEOMETRY_TOL, help="tangency tolerance")
    p.add_argument("--output", help="output file (default stdout)")
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("certify", help="Von Neumann test of one disk for one matrix",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--disk", required=True, help="disk JSON")
    p.add_argument("--matrix", required=True, help="matrix JSON")
    p.add_argument("--output", help="output file (default stdout)")
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("bounds", help="Bound curves of K(R) as CSV",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--R", type=float, nargs="+", help="outer radii")
    group.add_argument("--R-range", dest="R_range", help="geometric grid a:b:n")
    p.add_argument("--tail-tol", dest="tail_tol", type=_positive_float, default=settings.TAIL_TOL,
                   help="truncation tolerance of the γ product")
    p.add_argument("--output", help="output CSV (default stdout)")
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser("verify", help="Run the annulus calculus checks for one operator",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--matrix", help="matrix JSON")
    source.add_argument("--random", type=_positive_int, metavar="N", help="random admissible N×N operator")
    source.add_argument("--witness", action="store_true", help="Jordan witness operator")
    p.add_argument("--R", type=float, required=True, help="outer radius of X(1/R, R)")
    p.add_argument("--seed", type=int, default=0, help="seed for --random")
    p.add_argument("--tol", type=_positive_float, default=settings.QUAD_TOL, help="quadrature tolerance")
    p.add_argument("--quad-nodes", dest="quad_nodes", type=_power_of_two, default=settings.QUAD_NODES,
                   help="initial quadrature nodes")
    p.add_argument("--margin", type=_positive_float, default=settings.STRICT_MARGIN, help="strictness margin")
    p.add_argument("--function", help="rational function JSON added to the represent battery")
    p.add_argument("--output", help="output file (default stdout)")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("estimate", help="Empirical lower estimates of K(R)",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--R", type=float, required=True, help="outer radius")
    p.add_argument("--mode", choices=["witness", "random", "complete"], default="witness")
    p.add_argument("--n", type=_positive_int, default=2, help="dimension for random/complete modes")
    p.add_argument("--degree", type=_positive_int, default=settings.ESTIMATE_DEGREE, help="Laurent degree")
    p.add_argument("--budget", type=_positive_int, default=settings.ESTIMATE_BUDGET, help="ratio evaluations")
    p.add_argument("--trials", type=_positive_int, default=settings.COMPLETE_TRIALS, help="complete-mode trials")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="output file (default stdout)")
    p.set_defaults(handler=cmd_estimate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit code"""
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        return args.handler(args)
    except AmbiguousClassificationError as e:
        logger.error(f"❌ Ambiguous classification, candidates {e.candidates[0]} / {e.candidates[1]}")
        return e.exit_code
    except KSpectralError as e:
        logger.error(f"❌ {type(e).__name__}: {e}", exc_info=is_debug())
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
