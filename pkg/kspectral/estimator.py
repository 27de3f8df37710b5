"""
Empirical K(R) estimation
Witness operators, random admissible operators, ratio search over Laurent
functions and the annulus Carathéodory extremal problem
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional
import logging
import math

import numpy as np
from scipy.optimize import linprog

from config import settings
from errors import DomainError, InadmissibleOperatorError, NumericalError, PrecisionError, SamplingError, SingularMatrixError
from linalg import Matrix, as_matrix, identity, inverse, spectral_norm
from ratfun import (
    MatrixRationalFunction,
    RationalFunction,
    derivative_at,
    eval_matrix,
    sample_annulus_boundary,
    sup_norm_annulus,
)

logger = logging.getLogger(__name__)

MIN_STEP = 1e-6
DEFAULT_RESTARTS = 4
CUT_VIOLATION = 1e-4
CUTS_PER_ROUND = 256
COEFFICIENT_BOUND = 4.0
SEED_MIN_POINTS = 64
SEED_DIRECTIONS = 8
START_SAMPLES = 1024
# evaluations charged per cutting-plane round of an eigenvalue start
START_ROUND_COST = 100


@dataclass(frozen=True, eq=False)
class RatioResult:
    """Realized constant ‖f(A)‖ / ‖f‖_X with its certification data"""

    ratio: float
    f: RationalFunction
    samples: int
    sampling_slack: float
    converged: bool = True
    evaluations: int = 0


@dataclass(frozen=True, eq=False)
class ExtremalResult:
    value: float
    f: RationalFunction
    converged: bool
    rounds: int


def _require_ring(R: float) -> float:
    if not (R > 1.0 and math.isfinite(R)):
        raise DomainError(f"R must be a finite number > 1, got {R}")
    return float(R)


# ========================================
# Operators
# ========================================

def jordan_witness(R: float) -> Matrix:
    """
    [[1, t₀], [0, 1]] with t₀ = R - 1/R, so that ‖A‖ = ‖A⁻¹‖ = R

    Args:
        R: outer radius, > 1

    Returns:
        2×2 witness operator
    """
    R = _require_ring(R)
    a = np.array([[1.0, R - 1.0 / R], [0.0, 1.0]], dtype=np.complex128)
    for name, norm in (("‖A‖", spectral_norm(a)), ("‖A⁻¹‖", spectral_norm(inverse(a)))):
        if abs(norm - R) > 1e-12 * R:
            logger.error(f"❌ Witness check failed: {name}={norm:.15g}, R={R:.15g}")
            raise PrecisionError(f"Jordan witness {name}={norm!r} differs from R={R!r}")
    return a


def _random_unitary(n: int, rng: np.random.Generator) -> Matrix:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_admissible(n: int, R: float, seed: int, delta: Optional[float] = None) -> Matrix:
    """
    Seeded A = U G with U Haar-random unitary and G = V diag(λ) V*,
    λ uniform in [(1 + δ)/R, (1 - δ)R]

    Same (n, R, seed) always gives the same matrix.
    """
    R = _require_ring(R)
    if n < 1:
        raise DomainError(f"Dimension must be positive, got {n}")
    delta = settings.RANDOM_DELTA if delta is None else delta
    rng = np.random.default_rng(seed)
    u = _random_unitary(n, rng)
    v = _random_unitary(n, rng)
    lam = rng.uniform((1.0 + delta) / R, (1.0 - delta) * R, size=n)
    g = (v * lam) @ np.conj(v.T)
    return u @ (0.5 * (g + np.conj(g.T)))


def check_admissible(a: Matrix, R: float) -> None:
    """‖A‖ ≤ R and ‖A⁻¹‖ ≤ R up to relative 1e-12"""
    norm = spectral_norm(a)
    try:
        inverse_norm = spectral_norm(inverse(a))
    except SingularMatrixError:
        inverse_norm = math.inf
    limit = R * (1.0 + 1e-12)
    if norm > limit or inverse_norm > limit:
        logger.error(f"❌ Operator not admissible for R={R}: ‖A‖={norm:.6g}, ‖A⁻¹‖={inverse_norm:.6g}")
        raise InadmissibleOperatorError("Operator not admissible", norm, inverse_norm, R)


# ========================================
# Random functions
# ========================================

def random_laurent(degree: int, R: float, rng: np.random.Generator) -> RationalFunction:
    """Σ_{|k|≤degree} c_k z^k with complex Gaussian c_k scaled by R^{-|k|}"""
    k = np.arange(-degree, degree + 1)
    c = (rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)) / math.sqrt(2.0)
    return RationalFunction.laurent(c * float(R) ** (-np.abs(k)), -degree)


def random_matrix_function(dim: int, degree: int, R: float, rng: np.random.Generator) -> MatrixRationalFunction:
    return MatrixRationalFunction(tuple(
        tuple(random_laurent(degree, R, rng) for _ in range(dim)) for _ in range(dim)
    ))


# ========================================
# Ratios
# ========================================

def certified_sup_norm(f, R: float, samples: Optional[int] = None):
    """
    Boundary sup norm with sample doubling until the relative change is below SAMPLING_SLACK

    Returns:
        (sup norm, samples per circle, relative slack)

    Raises:
        SamplingError: slack still too large at MAX_CERT_SAMPLES
    """
    samples = settings.CERT_SAMPLES if samples is None else samples
    low = sup_norm_annulus(f, R, samples)
    while True:
        high = sup_norm_annulus(f, R, 2 * samples)
        slack = max(0.0, (high - low) / high) if high > 0 else 0.0
        samples *= 2
        if slack < settings.SAMPLING_SLACK:
            return max(low, high), samples, slack
        if samples >= settings.MAX_CERT_SAMPLES:
            logger.error(f"❌ Sup norm still moving by {slack:.2e} at {samples} samples")
            raise SamplingError(f"Sampling slack {slack:.2e} above {settings.SAMPLING_SLACK:.0e} at {samples} samples")
        low = high


def ratio(a: Matrix, R: float, f: RationalFunction, samples: Optional[int] = None) -> RatioResult:
    """
    ‖f(A)‖ / ‖f‖_X for X = X(1/R, R)

    Args:
        a: admissible operator
        R: outer radius
        f: rational function pole-free on the closed annulus
        samples: initial boundary samples per circle (default CERT_SAMPLES)

    Returns:
        RatioResult
    """
    R = _require_ring(R)
    a = as_matrix(a)
    sup, used, slack = certified_sup_norm(f, R, samples)
    if sup == 0.0:
        raise DomainError("Ratio undefined for the zero function")
    value = spectral_norm(eval_matrix(f, a)) / sup
    return RatioResult(ratio=value, f=f, samples=used, sampling_slack=slack)


def complete_ratio(a: Matrix, R: float, F: MatrixRationalFunction, samples: Optional[int] = None) -> float:
    """‖(F_ij(A))‖ / sup_{∂X} ‖F‖"""
    R = _require_ring(R)
    sup, _, _ = certified_sup_norm(F, R, samples)
    if sup == 0.0:
        raise DomainError("Ratio undefined for the zero function")
    return spectral_norm(F.eval_matrix(a)) / sup


# ========================================
# Carathéodory extremal problem
# ========================================

def _laurent_basis(z: np.ndarray, k: np.ndarray) -> np.ndarray:
    return z[:, None] ** k[None, :]


def _constraint_rows(basis: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """Rows of Re(e^{-iφ} f(z)) ≤ 1 in the real variables (Re c, Im c)"""
    rotated = np.exp(-1j * phases)[:, None] * basis
    return np.hstack([rotated.real, -rotated.imag])


def _violating_peaks(moduli: np.ndarray, per_circle: int) -> np.ndarray:
    """Indices of local maxima of |f| above 1 + CUT_VIOLATION, worst first"""
    circles = moduli.reshape(2, per_circle)
    peaks = (circles >= np.roll(circles, 1, axis=1)) & (circles >= np.roll(circles, -1, axis=1))
    index = np.flatnonzero(peaks.ravel() & (moduli > 1.0 + CUT_VIOLATION))
    if not index.size:
        index = np.flatnonzero(moduli > 1.0 + CUT_VIOLATION)
    return index[np.argsort(moduli[index])[::-1][:CUTS_PER_ROUND]]


def extremal_derivative(
    R: float,
    degree: int,
    samples: Optional[int] = None,
    z0: complex = 1.0,
    max_rounds: Optional[int] = None,
) -> ExtremalResult:
    """
    Lower estimate of sup{ |f'(z0)| / ‖f‖_X : f(z0) = 0 } over Laurent f

    Linear program in f(z) = Σ_{0<|k|≤degree} c_k (z^k - z0^k): maximize
    Re f'(z0) under Re(e^{-iφ} f(z_j)) ≤ 1. The program starts from a coarse
    set of boundary points with eight directions each; every round scans
    4·samples points per circle and adds cuts at φ = arg f(z) on the local
    maxima where |f| > 1 + CUT_VIOLATION.

    Args:
        R: outer radius, > 1
        degree: Laurent truncation, ≥ 1
        samples: boundary points per circle (default CARATHEODORY_SAMPLES)
        z0: interior point of the annulus
        max_rounds: cutting-plane round cap (default CARATHEODORY_MAX_ROUNDS)

    Returns:
        ExtremalResult whose value is Re f'(z0) / (refined sup norm of f)
    """
    R = _require_ring(R)
    if degree < 1:
        raise DomainError(f"degree must be ≥ 1, got {degree}")
    samples = settings.CARATHEODORY_SAMPLES if samples is None else int(samples)
    max_rounds = settings.CARATHEODORY_MAX_ROUNDS if max_rounds is None else max_rounds
    z0 = complex(z0)
    if not (1.0 / R < abs(z0) < R):
        raise DomainError(f"z0={z0} is not interior to the annulus")

    k = np.array([j for j in range(-degree, degree + 1) if j != 0])
    shift = z0 ** k
    grad = k * z0 ** (k - 1)
    objective = -np.concatenate([grad.real, -grad.imag])

    coarse = max(SEED_MIN_POINTS, samples // 8, 4 * degree)
    outer, inner = sample_annulus_boundary(R, coarse)
    basis = _laurent_basis(np.concatenate([outer, inner]), k) - shift
    directions = np.arange(SEED_DIRECTIONS) * (2.0 * np.pi / SEED_DIRECTIONS)
    rows = [_constraint_rows(np.repeat(basis, SEED_DIRECTIONS, axis=0), np.tile(directions, basis.shape[0]))]

    scan = 4 * samples
    dense_outer, dense_inner = sample_annulus_boundary(R, scan)
    dense_basis = _laurent_basis(np.concatenate([dense_outer, dense_inner]), k) - shift

    converged, coeffs = False, None
    for round_index in range(1, max_rounds + 1):
        a_ub = np.vstack(rows)
        result = linprog(objective, A_ub=a_ub, b_ub=np.ones(a_ub.shape[0]),
                         bounds=[(-COEFFICIENT_BOUND, COEFFICIENT_BOUND)] * (2 * k.size), method="highs")
        if result.status != 0:
            logger.error(f"❌ Carathéodory LP failed: {result.message}")
            raise NumericalError(f"Carathéodory linear program failed: {result.message}")
        coeffs = result.x[: k.size] + 1j * result.x[k.size:]
        values = dense_basis @ coeffs
        moduli = np.abs(values)
        violation = float(moduli.max()) - 1.0
        logger.debug(f"Carathéodory round {round_index}: LP value {-result.fun:.10f}, "
                     f"violation {violation:.2e}, {a_ub.shape[0]} rows")
        if violation <= CUT_VIOLATION:
            converged = True
            break
        worst = _violating_peaks(moduli, scan)
        rows.append(_constraint_rows(dense_basis[worst], np.angle(values[worst])))

    if not converged:
        logger.warning(f"⚠️  Carathéodory cutting planes stopped after {max_rounds} rounds")

    laurent = np.zeros(2 * degree + 1, dtype=np.complex128)
    laurent[k + degree] = coeffs
    laurent[degree] = -np.sum(coeffs * shift)
    f = RationalFunction.laurent(laurent, -degree)
    sup = sup_norm_annulus(f, R, max(scan, settings.SUP_SAMPLES))
    value = derivative_at(f, z0).real / sup
    logger.info(f"✅ Carathéodory estimate at z0={z0:.6g}: {value:.10f} (degree {degree}, {round_index} rounds)")
    return ExtremalResult(value=value, f=f.scale(1.0 / sup), converged=converged, rounds=round_index)


@lru_cache(maxsize=64)
def _cached_extremal(R: float, degree: int, z0: complex) -> ExtremalResult:
    return extremal_derivative(R, degree, samples=START_SAMPLES, z0=z0)


# ========================================
# Ratio maximization
# ========================================

class _RatioObjective:
    """Incremental ‖Σ c_k A^k‖ / max_j |Σ c_k z_j^k| for single-coefficient moves"""

    def __init__(self, a: Matrix, R: float, degree: int, samples: int):
        self.k = np.arange(-degree, degree + 1)
        outer, inner = sample_annulus_boundary(R, samples)
        self.basis = _laurent_basis(np.concatenate([outer, inner]), self.k)
        a_inv = inverse(a)
        powers = [identity(a.shape[0])]
        for _ in range(degree):
            powers.append(powers[-1] @ a)
        negative = [identity(a.shape[0])]
        for _ in range(degree):
            negative.append(negative[-1] @ a_inv)
        self.powers = np.stack(negative[:0:-1] + powers)
        self.weights = float(R) ** (-np.abs(self.k))
        self.evaluations = 0

    def state(self, c: np.ndarray):
        values = self.basis @ c
        fa = np.tensordot(c, self.powers, axes=1)
        return values, fa

    def value(self, values: np.ndarray, fa: np.ndarray) -> float:
        self.evaluations += 1
        return float(np.linalg.norm(fa, 2) / np.abs(values).max())


def _laurent_vector(f: RationalFunction, degree: int) -> np.ndarray:
    c = np.zeros(2 * degree + 1, dtype=np.complex128)
    for offset, coeff in enumerate(f.numerator):
        index = f.laurent_low + offset + degree
        if 0 <= index < c.size:
            c[index] = coeff
    return c


def _local_search(objective: _RatioObjective, c: np.ndarray, budget: int):
    """Coordinate search on real and imaginary parts; returns (c, ratio, locally converged)"""
    values, fa = objective.state(c)
    scale = np.abs(values).max()
    c, values, fa = c / scale, values / scale, fa / scale
    current = objective.value(values, fa)
    step = 0.25
    moves = (1.0, -1.0, 1j, -1j)
    while step > MIN_STEP:
        improved = False
        for i in range(c.size):
            column, power = objective.basis[:, i], objective.powers[i]
            for move in moves:
                if objective.evaluations >= budget:
                    return c, current, False
                delta = move * step * objective.weights[i]
                trial_values, trial_fa = values + delta * column, fa + delta * power
                trial = objective.value(trial_values, trial_fa)
                if trial > current * (1.0 + 1e-15):
                    scale = np.abs(trial_values).max()
                    c = c.copy()
                    c[i] += delta
                    c, values, fa, current = c / scale, trial_values / scale, trial_fa / scale, trial
                    improved = True
                    break
        if not improved:
            step /= 2.0
    return c, current, True


def _eigen_points(a: Matrix, R: float) -> List[complex]:
    """Distinct eigenvalues of A strictly inside the annulus"""
    points: List[complex] = []
    for lam in np.linalg.eigvals(a):
        if 1.0 / R < abs(lam) < R and not any(abs(lam - p) < 1e-8 for p in points):
            points.append(complex(lam))
    return points


def _eigen_start(R: float, degree: int, lam: complex):
    """Laurent vector of the extremal vanishing at λ and its charge in evaluations"""
    try:
        extremal = _cached_extremal(R, degree, lam)
    except (DomainError, NumericalError) as e:
        logger.warning(f"⚠️  No Carathéodory start at λ={lam:.6g}: {e}")
        return None, START_ROUND_COST
    return _laurent_vector(extremal.f, degree), extremal.rounds * START_ROUND_COST


def maximize_ratio(
    a: Matrix,
    R: float,
    degree: Optional[int] = None,
    budget: Optional[int] = None,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
    samples: Optional[int] = None,
) -> RatioResult:
    """
    Best ‖f(A)‖ / ‖f‖_X found over Laurent f with indices in [-degree, degree]

    Starts are run in a fixed order, each with an equal share of the budget
    that is left:
    the constant 1, the Carathéodory extremal vanishing at each eigenvalue of
    A in the annulus, then `restarts` seeded random Laurent functions. Each
    start is refined by coordinate search with ‖f‖_X normalized to 1, and the
    winner is re-certified with CERT_SAMPLES boundary points.

    An eigenvalue start is charged START_ROUND_COST evaluations per
    cutting-plane round out of its own share, leaving at least one
    evaluation for the start itself; a share too small to pay one round is
    spent without building the start.

    Args:
        a: operator with ‖A‖ ≤ R and ‖A⁻¹‖ ≤ R
        R: outer radius
        degree: Laurent truncation (default ESTIMATE_DEGREE)
        budget: ratio evaluations (default ESTIMATE_BUDGET)
        seed: seed of the random starts
        restarts: number of random starts
        samples: boundary samples per circle during the search (default SUP_SAMPLES)

    Returns:
        RatioResult; converged is False when the budget ran out first
    """
    R = _require_ring(R)
    a = as_matrix(a)
    degree = settings.ESTIMATE_DEGREE if degree is None else degree
    budget = settings.ESTIMATE_BUDGET if budget is None else budget
    if degree < 1:
        raise DomainError(f"degree must be ≥ 1, got {degree}")
    if budget < 1:
        raise DomainError(f"budget must be positive, got {budget}")
    check_admissible(a, R)

    objective = _RatioObjective(a, R, degree, settings.SUP_SAMPLES if samples is None else samples)
    constant = np.zeros(2 * degree + 1, dtype=np.complex128)
    constant[degree] = 1.0
    starts: list = [constant] + _eigen_points(a, R)
    for trial in range(restarts):
        rng = np.random.default_rng([seed, trial])
        starts.append(_laurent_vector(random_laurent(degree, R, rng), degree))

    best_c, best, converged = constant, -1.0, True
    for index, start in enumerate(starts):
        remaining = budget - objective.evaluations
        if remaining <= 0:
            converged = False
            break
        # equal share of the remaining budget
        share = max(1, remaining // (len(starts) - index))
        limit = objective.evaluations + share
        if isinstance(start, complex):
            if share <= START_ROUND_COST:
                objective.evaluations = limit
                converged = False
                continue
            start, charge = _eigen_start(R, degree, start)
            objective.evaluations = min(limit - 1, objective.evaluations + charge)
            if start is None:
                continue
        c, value, finished = _local_search(objective, start, limit)
        converged = converged and finished
        logger.debug(f"Start {index}: ratio {value:.10f} after {objective.evaluations} evaluations")
        if value > best:
            best_c, best = c, value

    f = RationalFunction.laurent(best_c, -degree)
    result = ratio(a, R, f)
    logger.info(f"✅ Best ratio {result.ratio:.10f} (R={R:g}, degree {degree}, {objective.evaluations} evaluations)")
    return RatioResult(
        ratio=result.ratio,
        f=f,
        samples=result.samples,
        sampling_slack=result.sampling_slack,
        converged=converged,
        evaluations=objective.evaluations,
    )
