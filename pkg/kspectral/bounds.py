"""
Closed-form K-spectral constants for the annulus
Shields' bound, the two-sided estimates of K(R), the Carathéodory product and J
"""

from dataclasses import asdict, dataclass, fields
from typing import List, Optional, Sequence, TextIO, Union
import logging
import math

import numpy as np
import pandas as pd

from config import settings
from errors import DomainError, PrecisionError

logger = logging.getLogger(__name__)

_PRODUCT_CHUNK = 4096


def _require_ring(R: float) -> float:
    R = float(R)
    if not math.isfinite(R) or R <= 1.0:
        raise DomainError(f"R must be a finite number > 1, got {R}")
    return R


def shields(r: float, R: float) -> float:
    """Shields' constant 2 + √((R + r)/(R - r)) for X(r, R)"""
    if not (0.0 < r < R):
        raise DomainError(f"Shields bound needs 0 < r < R, got r={r}, R={R}")
    return 2.0 + math.sqrt((R + r) / (R - r))


def j_closed(R: float) -> float:
    """√((R² + 2R + 1)/(R² + R + 1)), rearranged as √(1 + R/(R² + R + 1))"""
    R = _require_ring(R)
    return math.sqrt(1.0 + R / (R * R + R + 1.0))


def thm1_upper(R: float) -> float:
    """
    Upper bound of K(R) for the balanced annulus X(1/R, R)

    Args:
        R: outer radius, > 1

    Returns:
        2 + min(J(R), √((R² + 1)/(R² - 1))), never above 2 + 2/√3
    """
    R = _require_ring(R)
    shields_term = math.sqrt(1.0 + 2.0 / ((R - 1.0) * (R + 1.0)))
    return 2.0 + min(j_closed(R), shields_term)


def lower_simple(R: float) -> float:
    R = _require_ring(R)
    return 2.0 / (1.0 + R ** -2)


def balanced_radius(r: float, R: float) -> float:
    """R' with X(r, R) similar to X(1/R', R') (scaling by 1/√(rR))"""
    if not (0.0 < r < R):
        raise DomainError(f"Annulus needs 0 < r < R, got r={r}, R={R}")
    return math.sqrt(R / r)


def thm1_upper_general(r: float, R: float) -> float:
    return thm1_upper(balanced_radius(r, R))


def _sinh_ratio(a: float, b: np.ndarray) -> np.ndarray:
    """sinh(a)/sinh(b) for 0 < a ≤ b without overflow"""
    return np.exp(a - b) * np.expm1(-2.0 * a) / np.expm1(-2.0 * b)


def _log_gamma(R: float, tail_tol: float) -> float:
    """
    log γ(R) in the stable form γ = 2/(1 + R⁻²) · Π_{n≥1} (1 - x_n)⁻¹

    x_n = (sinh 2ε / sinh 4nε)², ε = log R. Since x_{n+1} ≤ R⁻⁸ x_n and
    x_n ≤ 1/(4n²), the log-tail after N factors is bounded by
    min(1/(4N), q x_N/(1 - q)) / (1 - x_N) with q = R⁻⁸.
    """
    eps = math.log(R)
    q = math.exp(-8.0 * eps)
    total = math.log(2.0) - math.log1p(R ** -2)
    cap = settings.PRODUCT_MAX_FACTORS
    n0 = 1
    while n0 <= cap:
        n = np.arange(n0, min(n0 + _PRODUCT_CHUNK, cap + 1), dtype=np.float64)
        x = _sinh_ratio(2.0 * eps, 4.0 * eps * n) ** 2
        total -= float(np.sum(np.log1p(-x)))
        N, xN = int(n[-1]), float(x[-1])
        geometric = q * xN / (1.0 - q) if q < 1.0 else math.inf
        tail = min(1.0 / (4.0 * N), geometric) / (1.0 - xN)
        if tail <= tail_tol:
            logger.debug(f"γ({R}) product truncated after {N} factors (tail ≤ {tail:.2e})")
            return total
        n0 = N + 1
    logger.error(f"❌ γ product tail {tail:.3e} above {tail_tol:.1e} after {cap} factors")
    raise PrecisionError(f"Product tail bound {tail:.3e} not below {tail_tol:.1e} within {cap} factors (R={R})")


def gamma_lower(R: float, tail_tol: Optional[float] = None) -> float:
    """
    Lower bound γ(R) = 2(1 - R⁻²) Π ((1 - R^{-8n})/(1 - R^{4-8n}))² of K(R)

    Args:
        R: outer radius, > 1
        tail_tol: bound on the relative truncation error (default TAIL_TOL)

    Returns:
        γ(R), strictly between 2/(1 + R⁻²) and 2; tends to π/2 as R → 1

    Raises:
        PrecisionError: tail bound not reached within PRODUCT_MAX_FACTORS
    """
    R = _require_ring(R)
    tail_tol = settings.TAIL_TOL if tail_tol is None else tail_tol
    if tail_tol <= 0:
        raise DomainError(f"tail_tol must be positive, got {tail_tol}")
    return math.exp(_log_gamma(R, tail_tol))


def caratheodory_product(R: float, tail_tol: Optional[float] = None) -> float:
    """Carathéodory value (2/R) Π ((1 - R^{-8n})/(1 - R^{4-8n}))² of the annulus at z = 1"""
    R = _require_ring(R)
    return gamma_lower(R, tail_tol) / (R - 1.0 / R)


def gamma_lower_product_form(R: float) -> float:
    """γ(R) straight from the product over n, for cross-checking the stable form"""
    R = _require_ring(R)
    log_r = math.log(R)
    # factors differ from 1 by less than 1e-17 beyond this index
    n_max = int((17.0 * math.log(10.0) / log_r + 4.0) / 8.0) + 1
    n = np.arange(1, min(n_max, settings.PRODUCT_MAX_FACTORS) + 1, dtype=np.float64)
    log_terms = np.log1p(-np.exp(-8.0 * n * log_r)) - np.log1p(-np.exp((4.0 - 8.0 * n) * log_r))
    return float(2.0 * (1.0 - R ** -2) * np.exp(2.0 * np.sum(log_terms)))


def _n_function(R: float, theta: np.ndarray, phi: float) -> np.ndarray:
    """Scalar lower kernel at a unit eigenvalue e^{iφ} of the polar factor"""
    r = 1.0 / R
    scale = 2.0 * math.pi / (R * R - r * r)
    alpha = R * R + r * r - R - r
    beta = (R + r + 2.0) / 4.0
    return scale * (alpha + 2.0 * beta * (1.0 - np.cos(theta - phi)))


def j_quadrature(R: float, phi: float = 0.0, nodes: int = 1024) -> float:
    """
    J(e^{iφ}) = ∫₀^{2π} dθ / N(θ, φ) by the periodic trapezoid rule

    Args:
        R: outer radius, > 1
        phi: eigenphase of the unitary polar factor
        nodes: trapezoid nodes

    Returns:
        Quadrature value, equal to j_closed(R) for every φ
    """
    R = _require_ring(R)
    if nodes < 1:
        raise DomainError(f"nodes must be positive, got {nodes}")
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    return float(2.0 * np.pi / nodes * np.sum(1.0 / _n_function(R, theta, phi)))


# ========================================
# Bound curves
# ========================================

@dataclass(frozen=True)
class BoundsRow:
    R: float
    lower_simple: float
    gamma: float
    upper_new: float
    upper_shields: float
    upper_min: float


BOUNDS_COLUMNS = [f.name for f in fields(BoundsRow)]


def curve_table(R_values: Sequence[float], tail_tol: Optional[float] = None) -> List[BoundsRow]:
    """
    One BoundsRow per R, order preserved

    Raises:
        DomainError: some R ≤ 1 (carries its index)
    """
    rows = []
    for i, R in enumerate(R_values):
        try:
            R = _require_ring(R)
            new, old = 2.0 + j_closed(R), shields(1.0 / R, R)
            rows.append(BoundsRow(
                R=R,
                lower_simple=lower_simple(R),
                gamma=gamma_lower(R, tail_tol),
                upper_new=new,
                upper_shields=old,
                upper_min=min(new, old),
            ))
        except DomainError as e:
            logger.error(f"❌ Bounds row {i} failed: {e}")
            raise DomainError(str(e), index=i) from e
    logger.info(f"✅ Computed {len(rows)} bound rows")
    return rows


def bounds_frame(rows: Sequence[BoundsRow]) -> pd.DataFrame:
    return pd.DataFrame([asdict(row) for row in rows], columns=BOUNDS_COLUMNS)


def write_csv(rows: Sequence[BoundsRow], target: Union[str, TextIO]) -> None:
    """CSV with header R,lower_simple,gamma,upper_new,upper_shields,upper_min, 12 significant digits"""
    bounds_frame(rows).to_csv(target, index=False, float_format="%.12g", lineterminator="\n")
