"""
Exception hierarchy for kspectral
Every error carries the CLI exit code of its category
"""

from typing import Optional, Tuple


class KSpectralError(Exception):
    """Base class of all toolkit errors"""

    exit_code = 1


class InvalidInputError(KSpectralError, ValueError):
    """Malformed or non-finite input"""

    exit_code = 2

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[int] = None):
        if row is not None:
            message = f"{message} (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message)
        self.row = row
        self.column = column


class DomainError(KSpectralError, ValueError):
    """Parameter outside the domain of an operation"""

    exit_code = 2

    def __init__(self, message: str, index: Optional[int] = None):
        if index is not None:
            message = f"{message} (at index {index})"
        super().__init__(message)
        self.index = index


class WrongCaseError(DomainError):
    """Operation requires a different intersection case"""


class PoleError(DomainError):
    """A pole of a rational function is where it must not be"""


class PoleEvaluationError(PoleError):
    """Evaluation point at or near a pole"""


class PoleMeetsSpectrumError(PoleError):
    """Denominator is singular at the matrix argument"""


class PoleInRegionError(PoleError):
    """Pole inside the closed annulus"""


class AmbiguousClassificationError(KSpectralError):
    """Geometric decision falls inside the tolerance band"""

    exit_code = 3

    def __init__(self, message: str, candidates: Tuple[str, str]):
        super().__init__(f"{message} (candidates: {candidates[0]} / {candidates[1]})")
        self.candidates = candidates


class InadmissibleOperatorError(KSpectralError):
    """Operator violates ‖A‖ ≤ R(1-margin) or ‖A⁻¹‖ ≤ R(1-margin)"""

    exit_code = 4

    def __init__(self, message: str, norm: float, inverse_norm: float, R: float):
        super().__init__(f"{message} (‖A‖={norm:.12g}, ‖A⁻¹‖={inverse_norm:.12g}, R={R:.12g})")
        self.norm = norm
        self.inverse_norm = inverse_norm
        self.R = R


class NumericalError(KSpectralError):
    """Numerical procedure failed"""

    exit_code = 5


class SingularMatrixError(NumericalError):
    """Matrix is numerically singular"""


class QuadratureError(NumericalError):
    """Node doubling did not reach the tolerance"""

    def __init__(self, message: str, delta: float, nodes: int):
        super().__init__(f"{message} (last delta {delta:.3e} at {nodes} nodes)")
        self.delta = delta
        self.nodes = nodes


class PositivityError(NumericalError):
    """A matrix expected to be positive definite is not"""


class PrecisionError(NumericalError):
    """Requested precision unattainable within the iteration cap"""


class SamplingError(NumericalError):
    """Boundary sampling slack above the reporting threshold"""
