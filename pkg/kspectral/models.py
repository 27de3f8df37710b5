"""
Pydantic models for kspectral input and output files
"""

from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union
import logging

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from errors import InvalidInputError
from geometry import Classification, MoebiusMap, Point, SphereDisk, SpectralCertificate, codisk, disk, halfplane
from linalg import Matrix, as_matrix
from ratfun import RationalFunction

logger = logging.getLogger(__name__)

Pair = Tuple[float, float]
PointJson = Union[Pair, Literal["inf"]]


def _pair(z: complex) -> Pair:
    return (float(z.real), float(z.imag))


def point_json(z: Point) -> PointJson:
    """∞ is written as the string "inf" """
    return "inf" if z is None else _pair(complex(z))


# ========================================
# Input models
# ========================================

class MatrixSpec(BaseModel):
    """Dense complex matrix as separate real and imaginary row-major grids"""

    n: int = Field(..., ge=1)
    re: List[List[float]]
    im: Optional[List[List[float]]] = None

    def to_matrix(self) -> Matrix:
        for name, grid in (("re", self.re), ("im", self.im)):
            if grid is None:
                continue
            if len(grid) != self.n:
                raise InvalidInputError(f"'{name}' has {len(grid)} rows, expected {self.n}")
            for i, row in enumerate(grid):
                if len(row) != self.n:
                    raise InvalidInputError(f"'{name}' row has {len(row)} entries, expected {self.n}", row=i)
        values = np.array(self.re, dtype=np.complex128)
        if self.im is not None:
            values = values + 1j * np.array(self.im, dtype=np.float64)
        return as_matrix(values)

    @classmethod
    def from_matrix(cls, a: Matrix) -> "MatrixSpec":
        a = as_matrix(a)
        return cls(n=a.shape[0], re=a.real.tolist(), im=a.imag.tolist())


class DiskSpec(BaseModel):
    """disk/codisk: center + radius; halfplane: {Re(e^{-iω} z) ≤ offset}"""

    kind: Literal["disk", "codisk", "halfplane"]
    center: Optional[Pair] = None
    radius: Optional[float] = None
    angle: Optional[float] = None
    offset: Optional[float] = None

    def to_disk(self) -> SphereDisk:
        if self.kind == "halfplane":
            if self.angle is None or self.offset is None:
                raise InvalidInputError("halfplane needs 'angle' and 'offset'")
            return halfplane(self.angle, self.offset)
        if self.center is None or self.radius is None:
            raise InvalidInputError(f"{self.kind} needs 'center' and 'radius'")
        make = disk if self.kind == "disk" else codisk
        return make(complex(*self.center), self.radius)

    @classmethod
    def from_disk(cls, d: SphereDisk) -> "DiskSpec":
        if d.kind == "halfplane":
            return cls(kind="halfplane", angle=d.angle, offset=d.offset)
        return cls(kind=d.kind, center=_pair(d.center), radius=d.radius)


class RationalSpec(BaseModel):
    num: List[Pair]
    den: List[Pair] = [(1.0, 0.0)]
    laurent_low: Optional[int] = None

    def to_function(self) -> RationalFunction:
        num = [complex(*c) for c in self.num]
        if self.laurent_low is not None:
            return RationalFunction.laurent(num, self.laurent_low)
        return RationalFunction(np.array(num), np.array([complex(*c) for c in self.den]))

    @classmethod
    def from_function(cls, f: RationalFunction) -> "RationalSpec":
        den = [(1.0, 0.0)] if f.is_laurent else [_pair(c) for c in f.denominator]
        return cls(num=[_pair(c) for c in f.numerator], den=den, laurent_low=f.laurent_low)


class MoebiusSpec(BaseModel):
    m11: Pair
    m12: Pair
    m21: Pair
    m22: Pair

    @classmethod
    def from_map(cls, m: MoebiusMap) -> "MoebiusSpec":
        return cls(m11=_pair(m.m11), m12=_pair(m.m12), m21=_pair(m.m21), m22=_pair(m.m22))


# ========================================
# Reports
# ========================================

class ClassificationReport(BaseModel):
    case: str
    boundary_points: List[PointJson] = []
    canonical_map: Optional[MoebiusSpec] = None
    canonical_R: Optional[float] = None
    constant: Optional[float] = None

    @classmethod
    def from_classification(cls, c: Classification, constant: Optional[float] = None) -> "ClassificationReport":
        return cls(
            case=c.case_label.value,
            boundary_points=[point_json(p) for p in c.boundary_points],
            canonical_map=MoebiusSpec.from_map(c.canonical_map) if c.canonical_map else None,
            canonical_R=c.canonical_R,
            constant=constant,
        )


class CertificateReport(BaseModel):
    spectral: bool
    kind: str
    measured: Optional[float]
    threshold: float
    singular: bool = False

    @classmethod
    def from_certificate(cls, cert: SpectralCertificate) -> "CertificateReport":
        measured = None if cert.singular else cert.measured
        return cls(spectral=cert.spectral, kind=cert.kind, measured=measured,
                   threshold=cert.threshold, singular=cert.singular)


class CheckResult(BaseModel):
    name: str
    passed: bool
    residual: float
    threshold: float


class VerifyReport(BaseModel):
    R: float
    n: int
    k_formula: float
    k_envelope: float
    checks: List[CheckResult]
    passed: bool


class EstimateReport(BaseModel):
    R: float
    mode: Literal["witness", "random", "complete"]
    ratio: float
    f: Optional[RationalSpec] = None
    converged: bool
    seed: int
    envelope: Pair
    trials: int = 1


# ========================================
# File helpers
# ========================================

def _load(model, path: Union[str, Path]):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"❌ Cannot read {path}: {e}")
        raise InvalidInputError(f"Cannot read {path}: {e}") from e
    try:
        return model.model_validate_json(text)
    except ValidationError as e:
        first = e.errors()[0]
        loc = [p for p in first.get("loc", ()) if isinstance(p, int)]
        logger.error(f"❌ Invalid {model.__name__} in {path}: {first['msg']}")
        raise InvalidInputError(
            f"Invalid {model.__name__} in {path}: {first['msg']}",
            row=loc[0] if loc else None,
            column=loc[1] if len(loc) > 1 else None,
        ) from e


def load_matrix(path: Union[str, Path]) -> Matrix:
    return _load(MatrixSpec, path).to_matrix()


def load_disk(path: Union[str, Path]) -> SphereDisk:
    return _load(DiskSpec, path).to_disk()


def load_function(path: Union[str, Path]) -> RationalFunction:
    return _load(RationalSpec, path).to_function()
