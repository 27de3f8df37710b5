#run_acceptance.py
"""
Full-size acceptance run for kspectral
Runs every suite, times it and prints a ✅/❌ summary; exit code 0 iff all pass

Usage: python scripts/run_acceptance.py [--only 1 4 9]
"""

from pathlib import Path
import argparse
import math
import sys
import tempfile
import time

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "kspectral"))

from bounds import (  # noqa: E402
    curve_table,
    gamma_lower,
    j_closed,
    j_quadrature,
    thm1_upper,
)
from calculus import QuadratureConfig, k_formula, make_context, partition_of_unity, represent, run_checks  # noqa: E402
from cli import configure_logging, main as cli_main  # noqa: E402
from estimator import (  # noqa: E402
    complete_ratio,
    extremal_derivative,
    jordan_witness,
    maximize_ratio,
    random_admissible,
    random_laurent,
    random_matrix_function,
    ratio,
)
from geometry import (  # noqa: E402
    CaseLabel,
    MoebiusMap,
    apply_map,
    certify_spectral,
    circline_intersection_count,
    classify,
    codisk,
    disk,
    halfplane,
    normalize_annulus,
)
from ratfun import RationalFunction, eval_matrix, sup_norm_annulus  # noqa: E402

SEED = 20240601
CONTEXTS = 50
FUNCTIONS_PER_CONTEXT = 10


def _contexts():
    """The 50 admissible contexts shared by the calculus suites"""
    rng = np.random.default_rng(SEED)
    out = []
    for i in range(CONTEXTS):
        n = int(rng.integers(2, 7))
        R = (1.2, 2.0, 5.0)[i % 3]
        out.append(make_context(random_admissible(n, R, SEED + i), R))
    return out


def _random_map(rng, max_condition=50.0):
    while True:
        m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        if np.linalg.cond(m) <= max_condition:
            return MoebiusMap.from_matrix(m)


# ========================================
# Suites
# ========================================

def suite_represent():
    errors = []
    rng = np.random.default_rng(SEED + 1)
    q = QuadratureConfig(tol=1e-9)
    for i, ctx in enumerate(_contexts()):
        for j in range(FUNCTIONS_PER_CONTEXT):
            if j % 2:
                f = random_laurent(int(rng.integers(1, 9)), ctx.R, rng)
            else:
                outer, inner = 1.5 * ctx.R, 1.0 / (1.5 * ctx.R)
                f = RationalFunction(
                    np.array([1.0, complex(*rng.standard_normal(2))]),
                    np.array([outer * inner, -(outer + inner), 1.0]),
                )
            error = np.linalg.norm(represent(ctx, f, q) - eval_matrix(f, ctx.a), 2)
            threshold = 1e-8 * max(1.0, sup_norm_annulus(f, ctx.R))
            if error > threshold:
                errors.append(f"context {i}, function {j}: error {error:.3e} > {threshold:.3e}")
    return errors


def suite_partition():
    errors = []
    for i, ctx in enumerate(_contexts()):
        outer, inner = partition_of_unity(ctx)
        if max(outer, inner) > 1e-10:
            errors.append(f"context {i}: residuals {outer:.3e}, {inner:.3e}")
    return errors


def suite_positivity():
    errors = []
    for i, ctx in enumerate(_contexts()):
        for check in run_checks(ctx, battery=[]):
            if check.name in ("mu_positivity", "domination") and not check.passed:
                errors.append(f"context {i}: {check.name} residual {check.residual:.3e}")
    return errors


def suite_k_envelope():
    errors = []
    for i, ctx in enumerate(_contexts()):
        k = k_formula(ctx)
        if k > 2.0 + j_closed(ctx.R) + 1e-8:
            errors.append(f"context {i}: K {k:.12f} above 2 + J({ctx.R})")
    k_identity = k_formula(make_context(np.eye(2), 2.0))
    if abs(k_identity - 3.0) > 1e-8:
        errors.append(f"K(I) = {k_identity:.12f}, expected 3")
    return errors


def suite_j_closed_form():
    errors = []
    for R in (1.1, 2.0, 10.0):
        for phi in (0.0, 1.0, 2.5):
            numeric, closed = j_quadrature(R, phi), j_closed(R)
            if abs(numeric - closed) > 1e-10:
                errors.append(f"R={R}, φ={phi}: {numeric:.14f} vs {closed:.14f}")
            if closed > 2.0 / math.sqrt(3.0):
                errors.append(f"J({R}) = {closed} above 2/√3")
    return errors


def suite_bounds_table():
    errors = []
    row = curve_table([2.0])[0]
    expected = [
        ("lower_simple", row.lower_simple, 1.6, 1e-12),
        ("gamma", row.gamma, 1.694137, 1e-5),
        ("upper_new", row.upper_new, 3.133893, 1e-6),
        ("upper_shields", row.upper_shields, 3.290994, 1e-6),
    ]
    for name, value, target, tol in expected:
        if abs(value - target) > tol:
            errors.append(f"{name}(2) = {value:.9f}, expected {target}")
    if abs(gamma_lower(1.001) - math.pi / 2) > 1e-2:
        errors.append(f"gamma(1.001) = {gamma_lower(1.001):.6f} not near π/2")
    rows = curve_table(list(np.geomspace(1.01, 10.0, 50)))
    if any(r.upper_min >= 3.2 for r in rows):
        errors.append("upper bound reached 3.2")
    for a, b in zip(rows, rows[1:]):
        if b.lower_simple < a.lower_simple or b.upper_new > a.upper_new:
            errors.append(f"monotonicity broken between R={a.R:.6g} and R={b.R:.6g}")
    return errors


def suite_no_violation():
    errors = []
    rng = np.random.default_rng(SEED + 7)
    radii = (1.5, 2.0, 5.0)
    for i in range(500):
        R = radii[i % 3]
        a = random_admissible(int(rng.integers(2, 5)), R, SEED + 1000 + i)
        value = ratio(a, R, random_laurent(int(rng.integers(1, 7)), R, rng)).ratio
        if value > thm1_upper(R) + 1e-6:
            errors.append(f"ratio {value:.10f} above bound at R={R}")
    for i in range(100):
        R = radii[i % 3]
        a = random_admissible(2, R, SEED + 2000 + i)
        value = complete_ratio(a, R, random_matrix_function(2, 3, R, rng))
        if value > thm1_upper(R) + 1e-6:
            errors.append(f"complete ratio {value:.10f} above bound at R={R}")
    return errors


def suite_lower_bound():
    errors = []
    R = 2.0
    best = maximize_ratio(jordan_witness(R), R, degree=16, budget=200_000).ratio
    if not (1.66 <= best <= 3.133894):
        errors.append(f"witness ratio {best:.10f} outside [1.66, 3.133894]")
    extremal = extremal_derivative(R, 12, 2048).value
    if not (1.118 <= extremal <= 1.134425):
        errors.append(f"extremal derivative {extremal:.10f} outside [1.118, 1.134425]")
    if (R - 1.0 / R) * extremal > best + 5e-3:
        errors.append(f"t₀·extremal {(R - 1.0 / R) * extremal:.10f} above the search result {best:.10f}")
    return errors


def suite_geometry():
    errors = []
    examples = [
        (disk(0, 1), disk(2, 1), CaseLabel.SINGLETON),
        (disk(0, 1), codisk(0, 1), CaseLabel.CIRCLINE),
        (halfplane(0.0, 0.0), halfplane(math.pi / 2, 0.0), CaseLabel.SECTOR_OR_STRIP),
        (disk(0, 1), disk(1, 1), CaseLabel.LENS),
        (disk(0, 2), codisk(0, 0.5), CaseLabel.RING),
        (disk(1j, 1), halfplane(-math.pi / 2, 0.0), CaseLabel.TANGENT),
    ]
    for d1, d2, label in examples:
        found = classify(d1, d2).case_label
        if found != label:
            errors.append(f"expected {label.value}, got {found.value}")

    rng = np.random.default_rng(SEED + 9)
    for d1, d2, _ in examples[:-1]:
        expected = circline_intersection_count(d1, d2)
        for _ in range(100):
            m = _random_map(rng)
            if circline_intersection_count(apply_map(m, d1), apply_map(m, d2)) != expected:
                errors.append("intersection count changed under a Möbius map")
                break

    d1, d2 = codisk(0, 1), codisk(5, 1)
    _, R = normalize_annulus(d1, d2)
    for _ in range(100):
        m = _random_map(rng)
        _, mapped = normalize_annulus(apply_map(m, d1), apply_map(m, d2))
        if abs(mapped - R) > 1e-8 * R:
            errors.append(f"canonical R {mapped:.12f} differs from {R:.12f}")

    for _ in range(100):
        a = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))) / 2
        center, radius = complex(*rng.standard_normal(2)), 0.2 + 2 * rng.random()
        brute = np.linalg.norm(a - center * np.eye(3), 2) <= radius + 1e-10 * max(1.0, radius)
        if bool(certify_spectral(disk(center, radius), a)) != brute:
            errors.append(f"certify_spectral disagrees with brute force at center {center:.4g}, radius {radius:.4g}")
    return errors


def suite_determinism():
    errors = []
    runs = [
        ["estimate", "--R", "2", "--degree", "6", "--budget", "5000", "--seed", "3"],
        ["estimate", "--R", "1.5", "--mode", "random", "--n", "3", "--degree", "4", "--budget", "3000", "--seed", "3"],
        ["verify", "--random", "4", "--R", "2", "--seed", "3"],
    ]
    with tempfile.TemporaryDirectory() as tmp:
        for i, args in enumerate(runs):
            outputs = []
            for attempt in range(2):
                path = Path(tmp) / f"run{i}-{attempt}.json"
                code = cli_main(args + ["--output", str(path)])
                if code != 0:
                    errors.append(f"{' '.join(args)} exited with {code}")
                outputs.append(path.read_bytes() if path.exists() else b"")
            if outputs[0] != outputs[1]:
                errors.append(f"{' '.join(args)} is not byte-identical across runs")
    return errors


SUITES = [
    (1, "Representation formula", suite_represent),
    (2, "Partition of unity", suite_partition),
    (3, "Kernel positivity and domination", suite_positivity),
    (4, "K formula envelope", suite_k_envelope),
    (5, "J closed form", suite_j_closed_form),
    (6, "Bounds table", suite_bounds_table),
    (7, "No bound violation", suite_no_violation),
    (8, "Lower bound realization", suite_lower_bound),
    (9, "Geometry", suite_geometry),
    (10, "Determinism", suite_determinism),
]


def main():
    parser = argparse.ArgumentParser(description="Run the kspectral acceptance suites")
    parser.add_argument("--only", type=int, nargs="+", help="suite numbers to run")
    args = parser.parse_args()
    configure_logging()

    selected = [s for s in SUITES if not args.only or s[0] in args.only]
    print(f"🔍 Running {len(selected)} acceptance suites...")
    failures = 0
    for number, name, suite in selected:
        start = time.perf_counter()
        try:
            errors = suite()
        except Exception as e:
            errors = [f"raised {type(e).__name__}: {e}"]
        elapsed = time.perf_counter() - start
        if errors:
            failures += 1
            print(f"\n❌ Suite {number} ({name}) failed in {elapsed:.1f}s")
            for err in errors[:20]:
                print(f"  - {err}")
            if len(errors) > 20:
                print(f"  ... and {len(errors) - 20} more")
        else:
            print(f"✅ Suite {number} ({name}) passed in {elapsed:.1f}s")

    if failures == 0:
        print("\n✅ All acceptance suites passed.")
    else:
        print(f"\n🚨 Failed suites: {failures}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
