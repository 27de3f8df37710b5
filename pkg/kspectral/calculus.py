"""
Annulus functional calculus
Kernels μ, M and N on X(1/R, R), the three-integral representation of f(A)
and the operator bound K = 2 + ‖∫ (Re M)⁻¹ dθ‖
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple
import logging
import math

import numpy as np

from bounds import j_closed
from config import get_quadrature_defaults, settings
from errors import DomainError, InadmissibleOperatorError, PositivityError, QuadratureError, SingularMatrixError
from linalg import (
    Matrix,
    PolarFactors,
    adjoint,
    as_matrix,
    hermitian_part,
    identity,
    inverse,
    polar_decompose,
    spectral_norm,
)
from models import CheckResult
from ratfun import RationalFunction, check_annulus_poles, eval_matrix, sup_norm_annulus

logger = logging.getLogger(__name__)

PARTITION_TOL = 1e-10
POSITIVITY_TOL = 1e-12
DOMINATION_TOL = 1e-10
CHECK_ANGLES = 64


@dataclass(frozen=True)
class QuadratureConfig:
    """Periodic trapezoid settings: initial nodes, doubling tolerance, node cap"""

    nodes: int = 256
    tol: float = 1e-8
    max_nodes: int = 32768

    def __post_init__(self):
        if self.nodes < 64 or self.nodes & (self.nodes - 1):
            raise DomainError(f"Quadrature nodes must be a power of 2 and ≥ 64, got {self.nodes}")
        if self.tol <= 0:
            raise DomainError(f"Quadrature tolerance must be positive, got {self.tol}")
        if self.max_nodes < 2 * self.nodes:
            raise DomainError(f"max_nodes {self.max_nodes} leaves no doubling above {self.nodes} nodes")


@dataclass(frozen=True, eq=False)
class AnnulusContext:
    """Strictly admissible operator for the balanced annulus X(1/R, R)"""

    R: float
    r: float
    a: Matrix
    a_inv: Matrix
    a_adj: Matrix
    polar: PolarFactors
    margin: float

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def scale(self) -> float:
        """2π/(R² - r²)"""
        return 2.0 * math.pi / (self.R ** 2 - self.r ** 2)


def make_context(a: Matrix, R: float, margin: Optional[float] = None) -> AnnulusContext:
    """
    Validate ‖A‖ ≤ R(1 - margin) and ‖A⁻¹‖ ≤ R(1 - margin) and precompute factors

    Args:
        a: square matrix
        R: outer radius, > 1
        margin: strictness margin (default STRICT_MARGIN)

    Returns:
        AnnulusContext

    Raises:
        InadmissibleOperatorError: with the measured norms
    """
    a = as_matrix(a)
    margin = settings.STRICT_MARGIN if margin is None else float(margin)
    if not (R > 1.0 and math.isfinite(R)):
        raise DomainError(f"R must be a finite number > 1, got {R}")
    if not (0.0 < margin < 1.0):
        raise DomainError(f"margin must lie in (0, 1), got {margin}")

    norm = spectral_norm(a)
    try:
        a_inv = inverse(a)
    except SingularMatrixError as e:
        logger.error(f"❌ Operator is singular: {e}")
        raise InadmissibleOperatorError("Operator is not invertible", norm, math.inf, R) from e
    inverse_norm = spectral_norm(a_inv)
    limit = R * (1.0 - margin)
    if norm > limit or inverse_norm > limit:
        logger.error(f"❌ Inadmissible operator: ‖A‖={norm:.6g}, ‖A⁻¹‖={inverse_norm:.6g}, limit {limit:.6g}")
        raise InadmissibleOperatorError(f"Operator exceeds R(1-margin)={limit:.12g}", norm, inverse_norm, R)

    a_inv.setflags(write=False)
    return AnnulusContext(R=float(R), r=1.0 / R, a=a, a_inv=a_inv, a_adj=adjoint(a),
                          polar=polar_decompose(a), margin=margin)


# ========================================
# Kernels (batched over θ)
# ========================================

def _mu_batch(theta: np.ndarray, b: Matrix, r: float) -> np.ndarray:
    """(1/4π)(T + T*), T = (1 + e^{-iθ} r b)(1 - e^{-iθ} r b)⁻¹ = 2(1 - e^{-iθ} r b)⁻¹ - 1"""
    eye = identity(b.shape[0])
    resolvent_arg = eye - (np.exp(-1j * theta) * r)[:, None, None] * b
    t = 2.0 * np.linalg.solve(resolvent_arg, np.broadcast_to(eye, resolvent_arg.shape)) - eye
    return (t + adjoint(t)) / (4.0 * math.pi)


def _m_batch(ctx: AnnulusContext, theta: np.ndarray) -> np.ndarray:
    eye = identity(ctx.n)
    phase = np.exp(1j * theta)[:, None, None]
    adj_inv = adjoint(ctx.a_inv)
    return ctx.scale * ((ctx.R ** 2 + ctx.r ** 2) * eye - adj_inv / phase - phase * ctx.a_adj)


def _n_batch(ctx: AnnulusContext, theta: np.ndarray) -> np.ndarray:
    R, r = ctx.R, ctx.r
    u = ctx.polar.unitary
    eye = identity(ctx.n)
    phase = np.exp(1j * theta)[:, None, None]
    rotation = 2.0 * eye - phase * adjoint(u) - u / phase
    return ctx.scale * ((R * R + r * r - R - r) * eye + (R + r + 2.0) / 4.0 * rotation)


def kernel_mu(ctx: AnnulusContext, theta: float, b: Matrix) -> Matrix:
    """
    Poisson-type kernel μ(θ, b) on the circle of radius R

    Hermitian, and positive semidefinite whenever ‖b‖ < R.

    Raises:
        InadmissibleOperatorError: ‖b‖ ≥ R, the resolvent may be singular
    """
    b = as_matrix(b)
    norm = spectral_norm(b)
    if norm >= ctx.R:
        raise InadmissibleOperatorError("kernel_mu needs ‖b‖ < R", norm, math.nan, ctx.R)
    return _mu_batch(np.atleast_1d(float(theta)), b, ctx.r)[0]


def kernel_M(ctx: AnnulusContext, theta: float) -> Matrix:
    """2π/(R² - r²) (R² + r² - (e^{iθ} A*)⁻¹ - e^{iθ} A*)"""
    return _m_batch(ctx, np.atleast_1d(float(theta)))[0]


def kernel_N(ctx: AnnulusContext, theta: float) -> Matrix:
    """Lower bound of Re M built from the unitary polar factor of A"""
    return _n_batch(ctx, np.atleast_1d(float(theta)))[0]


# ========================================
# Quadrature
# ========================================

def _integrate(batch_sum: Callable[[np.ndarray], np.ndarray], q: QuadratureConfig, label: str) -> Tuple[np.ndarray, int, float]:
    """
    Periodic trapezoid of ∫₀^{2π} with node doubling

    batch_sum(theta) returns the integrand summed over the given nodes. Each
    doubling only evaluates the new midpoints.

    Returns:
        (value, nodes used, last successive difference)
    """
    nodes = q.nodes
    total = batch_sum(2.0 * np.pi * np.arange(nodes) / nodes)
    value = 2.0 * np.pi / nodes * total
    delta = math.inf
    while nodes < q.max_nodes:
        midpoints = 2.0 * np.pi * (2 * np.arange(nodes) + 1) / (2 * nodes)
        total = total + batch_sum(midpoints)
        nodes *= 2
        refined = 2.0 * np.pi / nodes * total
        delta = float(np.linalg.norm(refined - value, ord=2))
        value = refined
        logger.debug(f"{label}: {nodes} nodes, delta {delta:.3e}")
        if delta <= q.tol:
            return value, nodes, delta
    logger.error(f"❌ {label} did not converge: delta {delta:.3e} at {nodes} nodes")
    raise QuadratureError(f"{label} quadrature did not reach tolerance {q.tol:g}", delta, nodes)


def represent(ctx: AnnulusContext, f: RationalFunction, q: Optional[QuadratureConfig] = None) -> Matrix:
    """
    f(A) from its boundary values

    f(A) = ∫ f(Re^{iθ}) μ(θ, A) dθ + ∫ f(re^{iθ}) μ(-θ, A⁻¹) dθ - ∫ f(e^{iθ}) M(θ, A*)⁻¹ dθ

    Args:
        ctx: admissible context
        f: rational function without poles on the closed annulus
        q: quadrature settings (default from config)

    Returns:
        Matrix within q.tol of p(A) q(A)⁻¹

    Raises:
        QuadratureError: no convergence at q.max_nodes
    """
    q = q or get_quadrature_defaults()
    check_annulus_poles(f, ctx.R)
    eye = identity(ctx.n)

    def batch_sum(theta: np.ndarray) -> np.ndarray:
        outer = f.eval_points(ctx.R * np.exp(1j * theta))[:, None, None] * _mu_batch(theta, ctx.a, ctx.r)
        inner = f.eval_points(ctx.r * np.exp(1j * theta))[:, None, None] * _mu_batch(-theta, ctx.a_inv, ctx.r)
        m = _m_batch(ctx, theta)
        m_inv = np.linalg.solve(m, np.broadcast_to(eye, m.shape))
        middle = f.eval_points(np.exp(1j * theta))[:, None, None] * m_inv
        return (outer + inner - middle).sum(axis=0)

    value, nodes, delta = _integrate(batch_sum, q, "represent")
    logger.debug(f"represent converged with {nodes} nodes (delta {delta:.2e})")
    return value


def partition_of_unity(ctx: AnnulusContext, q: Optional[QuadratureConfig] = None) -> Tuple[float, float]:
    """Residuals ‖∫ μ(θ, A) dθ - I‖ and ‖∫ μ(-θ, A⁻¹) dθ - I‖"""
    q = q or get_quadrature_defaults()
    eye = identity(ctx.n)
    outer, _, _ = _integrate(lambda t: _mu_batch(t, ctx.a, ctx.r).sum(axis=0), q, "μ(θ,A)")
    inner, _, _ = _integrate(lambda t: _mu_batch(-t, ctx.a_inv, ctx.r).sum(axis=0), q, "μ(-θ,A⁻¹)")
    return spectral_norm(outer - eye), spectral_norm(inner - eye)


def k_formula(ctx: AnnulusContext, q: Optional[QuadratureConfig] = None) -> float:
    """
    K = 2 + ‖∫₀^{2π} (Re M(θ, A*))⁻¹ dθ‖

    Raises:
        PositivityError: Re M not positive definite at some node
    """
    q = q or get_quadrature_defaults()

    def batch_sum(theta: np.ndarray) -> np.ndarray:
        w, v = np.linalg.eigh(hermitian_part(_m_batch(ctx, theta)))
        lowest = float(w[:, 0].min())
        if lowest <= 0.0:
            logger.error(f"❌ Re M not positive definite (min eigenvalue {lowest:.3e})")
            raise PositivityError(f"Re M has eigenvalue {lowest:.3e} ≤ 0; operator not admissible")
        return np.einsum("tij,tj,tkj->ik", v, 1.0 / w, np.conj(v))

    integral, nodes, _ = _integrate(batch_sum, q, "k_formula")
    k = 2.0 + spectral_norm(hermitian_part(integral))
    logger.info(f"✅ K formula = {k:.12g} (R={ctx.R:g}, {nodes} nodes)")
    return k


# ========================================
# Verification suite
# ========================================

def default_battery(R: float) -> List[Tuple[str, RationalFunction]]:
    """Test functions for represent: z, 1/z, z² + z⁻² and a rational with poles on both sides"""
    outer_pole, inner_pole = 2.0 * R, 1.0 / (2.0 * R)
    return [
        ("one", RationalFunction.constant(1.0)),
        ("z", RationalFunction.polynomial([0.0, 1.0])),
        ("inverse_z", RationalFunction.laurent([1.0], -1)),
        ("z2_plus_zm2", RationalFunction.laurent([1.0, 0.0, 0.0, 0.0, 1.0], -2)),
        ("two_pole_rational", RationalFunction(
            np.array([1.0, 1.0]),
            np.array([outer_pole * inner_pole, -(outer_pole + inner_pole), 1.0]),
        )),
    ]


def _min_eig(batch: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(batch))[:, 0].min())


def run_checks(
    ctx: AnnulusContext,
    q: Optional[QuadratureConfig] = None,
    battery: Optional[List[Tuple[str, RationalFunction]]] = None,
) -> List[CheckResult]:
    """
    Calculus verification suite for one operator

    Partition of unity, kernel positivity, domination Re M ⪰ N, represent
    against direct evaluation on a battery of functions, and the K formula
    against 2 + J(R).
    """
    q = q or get_quadrature_defaults()
    battery = default_battery(ctx.R) if battery is None else battery
    checks = []

    outer, inner = partition_of_unity(ctx, q)
    checks.append(CheckResult(name="partition_outer", passed=outer <= PARTITION_TOL, residual=outer, threshold=PARTITION_TOL))
    checks.append(CheckResult(name="partition_inner", passed=inner <= PARTITION_TOL, residual=inner, threshold=PARTITION_TOL))

    theta = 2.0 * np.pi * np.arange(CHECK_ANGLES) / CHECK_ANGLES
    negativity = max(0.0, -min(_min_eig(_mu_batch(theta, ctx.a, ctx.r)), _min_eig(_mu_batch(-theta, ctx.a_inv, ctx.r))))
    checks.append(CheckResult(name="mu_positivity", passed=negativity <= POSITIVITY_TOL, residual=negativity, threshold=POSITIVITY_TOL))

    gap = max(0.0, -_min_eig(hermitian_part(_m_batch(ctx, theta)) - _n_batch(ctx, theta)))
    checks.append(CheckResult(name="domination", passed=gap <= DOMINATION_TOL, residual=gap, threshold=DOMINATION_TOL))

    for name, f in battery:
        error = spectral_norm(represent(ctx, f, q) - eval_matrix(f, ctx.a))
        threshold = q.tol * max(1.0, sup_norm_annulus(f, ctx.R))
        checks.append(CheckResult(name=f"represent_{name}", passed=error <= threshold, residual=error, threshold=threshold))

    k = k_formula(ctx, q)
    envelope = 2.0 + j_closed(ctx.R) + q.tol
    checks.append(CheckResult(name="k_envelope", passed=k <= envelope, residual=k, threshold=envelope))

    failed = [c.name for c in checks if not c.passed]
    if failed:
        logger.warning(f"⚠️  {len(failed)} calculus checks failed: {', '.join(failed)}")
    else:
        logger.info(f"✅ All {len(checks)} calculus checks passed")
    return checks
