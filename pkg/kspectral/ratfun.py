"""
Rational and Laurent functions
Scalar and matrix evaluation, derivatives and sup norms on annulus boundaries
"""

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple, Union
import logging

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import minimize_scalar

from config import settings
from errors import (
    DomainError,
    InvalidInputError,
    PoleEvaluationError,
    PoleInRegionError,
    PoleMeetsSpectrumError,
    SingularMatrixError,
)
from linalg import Matrix, as_matrix, identity, inverse, solve

logger = logging.getLogger(__name__)


def _coefficients(values: Iterable) -> np.ndarray:
    c = np.array(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.complex128).ravel()
    if c.size == 0:
        raise InvalidInputError("Empty coefficient list")
    if not np.all(np.isfinite(c)):
        raise InvalidInputError("Non-finite coefficient")
    return c


def _trim_high(c: np.ndarray) -> np.ndarray:
    nonzero = np.flatnonzero(c)
    if nonzero.size == 0:
        return c[:1] * 0
    return c[: nonzero[-1] + 1]


def _horner_matrix(coeffs: np.ndarray, a: Matrix) -> Matrix:
    """Σ coeffs[k] a^k by Horner's scheme"""
    eye = identity(a.shape[0])
    result = coeffs[-1] * eye
    for c in coeffs[-2::-1]:
        result = result @ a + c * eye
    return result


@dataclass(frozen=True, eq=False)
class RationalFunction:
    """
    Quotient of complex polynomials, coefficients in ascending degree

    When laurent_low is set the function is Σ c_k z^k for
    k = laurent_low .. laurent_low + len(numerator) - 1, and the denominator
    is the monomial z^{-laurent_low} (or 1).
    """

    numerator: np.ndarray
    denominator: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=np.complex128))
    laurent_low: Optional[int] = None

    def __post_init__(self):
        num = _trim_high(_coefficients(self.numerator))
        den = _trim_high(_coefficients(self.denominator))
        low = self.laurent_low
        if low is not None:
            low = int(low)
            nonzero = np.flatnonzero(num)
            if nonzero.size == 0:
                num, low = num[:1], 0
            else:
                low += int(nonzero[0])
                num = num[nonzero[0]:]
            den = np.zeros(max(-low, 0) + 1, dtype=np.complex128)
            den[-1] = 1.0
        elif not np.any(den):
            raise InvalidInputError("Denominator is identically zero")
        num.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)
        object.__setattr__(self, "laurent_low", low)

    # ---------- constructors ----------

    @classmethod
    def laurent(cls, coeffs: Sequence[complex], low: int) -> "RationalFunction":
        return cls(np.asarray(coeffs, dtype=np.complex128), laurent_low=low)

    @classmethod
    def polynomial(cls, coeffs: Sequence[complex]) -> "RationalFunction":
        return cls.laurent(coeffs, 0)

    @classmethod
    def constant(cls, c: complex) -> "RationalFunction":
        return cls.laurent([c], 0)

    @classmethod
    def moebius(cls, m) -> "RationalFunction":
        """(m11 z + m12)/(m21 z + m22) for a MoebiusMap m"""
        return cls(np.array([m.m12, m.m11]), np.array([m.m22, m.m21]))

    # ---------- structure ----------

    @property
    def is_laurent(self) -> bool:
        return self.laurent_low is not None

    @property
    def laurent_high(self) -> int:
        return self.laurent_low + len(self.numerator) - 1

    def poles(self) -> np.ndarray:
        if self.is_laurent:
            return np.zeros(max(-self.laurent_low, 0), dtype=np.complex128)
        if len(self.denominator) == 1:
            return np.zeros(0, dtype=np.complex128)
        return np.roots(self.denominator[::-1])

    def scale(self, c: complex) -> "RationalFunction":
        if self.is_laurent:
            return RationalFunction(self.numerator * c, laurent_low=self.laurent_low)
        return RationalFunction(self.numerator * c, self.denominator)

    def product(self, other: "RationalFunction") -> "RationalFunction":
        if self.is_laurent and other.is_laurent:
            return RationalFunction(
                np.convolve(self.numerator, other.numerator),
                laurent_low=self.laurent_low + other.laurent_low,
            )
        num_a, den_a = self._general()
        num_b, den_b = other._general()
        return RationalFunction(np.convolve(num_a, num_b), np.convolve(den_a, den_b))

    def _general(self) -> Tuple[np.ndarray, np.ndarray]:
        """(numerator, denominator) as plain polynomials"""
        if not self.is_laurent:
            return self.numerator, self.denominator
        low = self.laurent_low
        if low >= 0:
            return np.concatenate([np.zeros(low, dtype=np.complex128), self.numerator]), np.ones(1, dtype=np.complex128)
        return self.numerator, self.denominator

    # ---------- evaluation ----------

    def eval_points(self, z) -> np.ndarray:
        """Vectorized values at points known to avoid the poles"""
        z = np.asarray(z, dtype=np.complex128)
        if self.is_laurent:
            return P.polyval(z, self.numerator) * z ** self.laurent_low
        return P.polyval(z, self.numerator) / P.polyval(z, self.denominator)

    def __call__(self, z: complex) -> complex:
        return eval_scalar(self, z)


def _check_not_pole(f: RationalFunction, z: complex) -> None:
    poles = f.poles()
    if poles.size and np.min(np.abs(poles - z)) <= settings.POLE_DISTANCE:
        raise PoleEvaluationError(f"Evaluation point {z} is at a pole")


def eval_scalar(f: RationalFunction, z: complex) -> complex:
    """
    p(z)/q(z) by nested evaluation

    Raises:
        PoleEvaluationError: z within POLE_DISTANCE of a pole
    """
    z = complex(z)
    _check_not_pole(f, z)
    return complex(f.eval_points(z))


def derivative_at(f: RationalFunction, z: complex) -> complex:
    """f'(z) from exact coefficient derivatives (quotient rule)"""
    z = complex(z)
    _check_not_pole(f, z)
    if f.is_laurent:
        k = np.arange(f.laurent_low, f.laurent_high + 1)
        return complex(np.sum(k * f.numerator * z ** (k - 1)))
    p, q = f.numerator, f.denominator
    pz, qz = P.polyval(z, p), P.polyval(z, q)
    dp = P.polyval(z, P.polyder(p)) if len(p) > 1 else 0.0
    dq = P.polyval(z, P.polyder(q)) if len(q) > 1 else 0.0
    return complex((dp * qz - pz * dq) / (qz * qz))


def eval_matrix(f: RationalFunction, a: Matrix) -> Matrix:
    """
    f(A) = p(A) q(A)⁻¹

    Laurent functions are evaluated as a Horner sum in A plus a Horner sum in
    A⁻¹, never through the ill-conditioned power A^{-low}.

    Raises:
        PoleMeetsSpectrumError: q(A) (or A for negative Laurent indices) is singular
    """
    a = as_matrix(a)
    try:
        if f.is_laurent:
            low = f.laurent_low
            if low >= 0:
                return _horner_matrix(f.numerator, a) @ np.linalg.matrix_power(a, low)
            split = -low
            negative, positive = f.numerator[:split], f.numerator[split:]
            a_inv = inverse(a)
            result = np.zeros_like(a)
            if positive.size:
                result = result + _horner_matrix(positive, a)
            # Σ_{j=1..split} c_{-j} A^{-j} = A^{-1} Σ_j c_{-j} A^{-(j-1)}
            result = result + a_inv @ _horner_matrix(negative[::-1], a_inv)
            return result
        return solve(_horner_matrix(f.denominator, a), _horner_matrix(f.numerator, a))
    except SingularMatrixError as e:
        logger.error(f"❌ Pole meets the spectrum: {e}")
        raise PoleMeetsSpectrumError(f"Denominator singular at the matrix argument: {e}") from e


@dataclass(frozen=True, eq=False)
class MatrixRationalFunction:
    """dim × dim grid of rational functions"""

    entries: Tuple[Tuple[RationalFunction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        if not rows or any(len(row) != len(rows) for row in rows):
            raise InvalidInputError("Matrix function must be a non-empty square grid")
        object.__setattr__(self, "entries", rows)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def poles(self) -> np.ndarray:
        return np.concatenate([f.poles() for row in self.entries for f in row])

    def eval_points(self, z) -> np.ndarray:
        """Values at points z, shape z.shape + (dim, dim)"""
        z = np.asarray(z, dtype=np.complex128)
        out = np.empty(z.shape + (self.dim, self.dim), dtype=np.complex128)
        for i, row in enumerate(self.entries):
            for j, f in enumerate(row):
                out[..., i, j] = f.eval_points(z)
        return out

    def eval_matrix(self, a: Matrix) -> Matrix:
        """Block matrix (f_ij(A))"""
        return np.block([[eval_matrix(f, a) for f in row] for row in self.entries])


AnyFunction = Union[RationalFunction, MatrixRationalFunction]


def sample_annulus_boundary(R: float, samples: int) -> Tuple[np.ndarray, np.ndarray]:
    """Equispaced points on |z| = R and |z| = 1/R"""
    circle = np.exp(2j * np.pi * np.arange(samples) / samples)
    return R * circle, circle / R


def check_annulus_poles(f: AnyFunction, R: float) -> None:
    poles = f.poles()
    if not poles.size:
        return
    eps = settings.POLE_DISTANCE
    moduli = np.abs(poles)
    inside = (moduli >= 1.0 / R - eps) & (moduli <= R + eps)
    if np.any(inside):
        p = complex(poles[np.argmax(inside)])
        logger.error(f"❌ Pole {p} lies in the closed annulus 1/R ≤ |z| ≤ R, R={R}")
        raise PoleInRegionError(f"Pole {p:.6g} inside the closed annulus of radius {R}")


def _modulus(f: AnyFunction, z) -> np.ndarray:
    values = f.eval_points(z)
    if isinstance(f, MatrixRationalFunction):
        return np.linalg.norm(values, ord=2, axis=(-2, -1))
    return np.abs(values)


def sup_norm_annulus(f: AnyFunction, R: float, samples: Optional[int] = None) -> float:
    """
    Sup of |f| (or ‖F‖) over the annulus {1/R ≤ |z| ≤ R}

    By the maximum principle the sup is taken on the two boundary circles:
    equispaced sampling followed by one bounded scalar refinement around the
    best sample.

    Args:
        f: scalar or matrix rational function, pole-free on the closed annulus
        R: outer radius, > 1
        samples: points per circle (default SUP_SAMPLES), ≥ 64

    Returns:
        Sampled lower estimate of ‖f‖_X. More samples never lower the grid
        maximum on nested grids; the refined value may still move by a few
        ulps between sample counts.
    """
    samples = settings.SUP_SAMPLES if samples is None else int(samples)
    if R <= 1:
        raise DomainError(f"Annulus radius must exceed 1, got {R}")
    if samples < 64:
        raise DomainError(f"At least 64 boundary samples required, got {samples}")
    check_annulus_poles(f, R)

    outer, inner = sample_annulus_boundary(R, samples)
    values = np.stack([_modulus(f, outer), _modulus(f, inner)])
    circle, j = np.unravel_index(int(np.argmax(values)), values.shape)
    best = float(values[circle, j])

    rho = R if circle == 0 else 1.0 / R
    theta0, h = 2.0 * np.pi * j / samples, 2.0 * np.pi / samples
    result = minimize_scalar(
        lambda t: -float(_modulus(f, rho * np.exp(1j * t))),
        bounds=(theta0 - h, theta0 + h),
        method="bounded",
        options={"xatol": 1e-13},
    )
    refined = max(best, -float(result.fun))
    logger.debug(f"sup norm: sampled {best:.15g}, refined {refined:.15g} ({samples} samples)")
    return refined
