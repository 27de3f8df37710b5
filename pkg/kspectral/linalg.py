"""
Dense complex matrix arithmetic
Norms, inverses, Hermitian eigendecompositions and the polar decomposition
"""

from dataclasses import dataclass
from typing import Tuple
import logging

import numpy as np

from config import settings
from errors import InvalidInputError, SingularMatrixError

logger = logging.getLogger(__name__)

Matrix = np.ndarray


@dataclass(frozen=True)
class PolarFactors:
    """Right polar factors a = unitary @ positive"""

    unitary: Matrix
    positive: Matrix


def as_matrix(a) -> Matrix:
    """
    Validate and convert input to a square complex matrix

    Args:
        a: array-like, square, finite

    Returns:
        Read-only complex128 copy
    """
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise InvalidInputError(f"Expected a square matrix, got shape {m.shape}")
    bad = np.argwhere(~np.isfinite(m))
    if bad.size:
        row, col = (int(i) for i in bad[0])
        raise InvalidInputError("Non-finite matrix entry", row=row, column=col)
    m.setflags(write=False)
    return m


def adjoint(a: Matrix) -> Matrix:
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_part(a: Matrix) -> Matrix:
    """Re of a matrix: (a + a*)/2"""
    return 0.5 * (a + adjoint(a))


def singular_values(a: Matrix) -> np.ndarray:
    return np.linalg.svd(as_matrix(a), compute_uv=False)


def spectral_norm(a: Matrix) -> float:
    """
    Operator 2-norm (largest singular value)

    Args:
        a: square matrix with finite entries

    Returns:
        ‖a‖
    """
    return float(singular_values(a)[0])


def condition_number(a: Matrix) -> float:
    s = singular_values(a)
    if s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])


def _check_invertible(a: Matrix, what: str = "matrix") -> None:
    s = singular_values(a)
    if s[0] == 0.0 or s[-1] < settings.SINGULAR_RCOND * s[0]:
        logger.error(f"❌ Singular {what}: σ_min={s[-1]:.3e}, σ_max={s[0]:.3e}")
        raise SingularMatrixError(
            f"Singular {what}: smallest singular value {s[-1]:.3e} below "
            f"{settings.SINGULAR_RCOND:.0e} x largest {s[0]:.3e}"
        )


def inverse(a: Matrix) -> Matrix:
    """
    Matrix inverse with a singular-value based singularity test

    Args:
        a: square matrix

    Returns:
        a⁻¹

    Raises:
        SingularMatrixError: smallest singular value below SINGULAR_RCOND x largest
    """
    a = as_matrix(a)
    _check_invertible(a)
    return np.linalg.solve(a, np.eye(a.shape[0], dtype=np.complex128))


def solve(a: Matrix, b: Matrix) -> Matrix:
    """a⁻¹ b for square a, same singularity test as inverse()"""
    a = as_matrix(a)
    _check_invertible(a)
    return np.linalg.solve(a, np.asarray(b, dtype=np.complex128))


def hermitian_eigh(a: Matrix, tol: float = 1e-10) -> Tuple[np.ndarray, Matrix]:
    """
    Eigendecomposition of a Hermitian matrix

    Args:
        a: Hermitian matrix (checked to tol relative to ‖a‖)
        tol: relative Hermiticity tolerance

    Returns:
        (ascending real eigenvalues, unitary eigenvector matrix)
    """
    a = as_matrix(a)
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - adjoint(a)).max() > tol * scale:
        raise InvalidInputError("Matrix is not Hermitian")
    return np.linalg.eigh(hermitian_part(a))


def hermitian_part_max_eig(a: Matrix) -> float:
    """Largest eigenvalue of (a + a*)/2"""
    a = as_matrix(a)
    return float(np.linalg.eigvalsh(hermitian_part(a))[-1])


def numerical_range_support(a: Matrix, omega: float) -> float:
    """
    Support function of the numerical range W(a) in direction e^{iω}

    W(a) ⊂ {z : Re(e^{-iω} z) ≤ h} iff h ≥ the returned value.
    """
    return hermitian_part_max_eig(np.exp(-1j * omega) * as_matrix(a))


def polar_decompose(a: Matrix) -> PolarFactors:
    """
    Right polar decomposition a = U G of an invertible matrix

    G is the Hermitian square root of a*a from its eigendecomposition and
    U = a G⁻¹.

    Args:
        a: invertible square matrix

    Returns:
        PolarFactors(unitary=U, positive=G)
    """
    a = as_matrix(a)
    _check_invertible(a, "polar input")
    w, v = np.linalg.eigh(hermitian_part(adjoint(a) @ a))
    w = np.clip(w, 0.0, None)
    root = np.sqrt(w)
    g = (v * root) @ adjoint(v)
    u = a @ ((v / root) @ adjoint(v))
    g = hermitian_part(g)
    residual = spectral_norm(u @ g - a)
    if residual > 1e-10 * spectral_norm(a):
        logger.warning(f"⚠️  Polar reconstruction residual {residual:.3e}")
    return PolarFactors(unitary=u, positive=g)


def is_unitary(a: Matrix, tol: float = 1e-10) -> bool:
    a = as_matrix(a)
    return bool(np.abs(adjoint(a) @ a - np.eye(a.shape[0])).max() <= tol)


def identity(n: int) -> Matrix:
    return np.eye(n, dtype=np.complex128)
