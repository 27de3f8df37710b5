"""
Riemann-sphere disks and Möbius maps
Two-disk intersection classification and von Neumann spectral-set certification

A closed disk of the sphere is stored by its Hermitian coefficient matrix
H = [[a, b], [conj(b), c]]; a point with homogeneous coordinates v belongs to
the disk iff v* H v ≤ 0. The point at infinity is v = (1, 0) and is passed
around as ``None``.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple
import logging
import math

import numpy as np

from config import settings
from errors import (
    AmbiguousClassificationError,
    DomainError,
    InvalidInputError,
    PoleMeetsSpectrumError,
    SingularMatrixError,
    WrongCaseError,
)
from linalg import Matrix, as_matrix, identity, inverse, numerical_range_support, solve, spectral_norm

logger = logging.getLogger(__name__)

Point = Optional[complex]

_KIND_EPS = 1e-12
_DEGENERATE_EPS = 1e-14
_SENTINEL_EPS = 1e-14


def _homogeneous(z: Point) -> np.ndarray:
    if z is None:
        return np.array([1.0, 0.0], dtype=np.complex128)
    return np.array([complex(z), 1.0], dtype=np.complex128)


def _dehomogenize(v: np.ndarray) -> Point:
    if abs(v[1]) <= _SENTINEL_EPS * abs(v[0]):
        return None
    return complex(v[0] / v[1])


def _orthogonal_point(w: np.ndarray) -> np.ndarray:
    """Homogeneous v with w* v = 0 (zero set of the rank-one form w w*)"""
    return np.array([-np.conj(w[1]), np.conj(w[0])], dtype=np.complex128)


# ========================================
# Disks
# ========================================

@dataclass(frozen=True)
class SphereDisk:
    """Closed disk {z : a|z|² + 2 Re(conj(b) z) + c ≤ 0} of the Riemann sphere"""

    coeff_a: float
    coeff_b: complex
    coeff_c: float

    def __post_init__(self):
        a, b, c = float(self.coeff_a), complex(self.coeff_b), float(self.coeff_c)
        if not all(math.isfinite(x) for x in (a, b.real, b.imag, c)):
            raise InvalidInputError("Non-finite disk coefficient")
        scale = max(abs(a), abs(b), abs(c))
        if scale == 0.0:
            raise InvalidInputError("Disk coefficients are all zero")
        a, b, c = a / scale, b / scale, c / scale
        if abs(b) ** 2 - a * c <= _DEGENERATE_EPS * (abs(b) ** 2 + abs(a * c)):
            raise InvalidInputError("Degenerate disk: discriminant |b|² - ac must be positive")
        object.__setattr__(self, "coeff_a", a)
        object.__setattr__(self, "coeff_b", b)
        object.__setattr__(self, "coeff_c", c)

    @classmethod
    def from_hermitian(cls, h: np.ndarray) -> "SphereDisk":
        return cls(float(h[0, 0].real), complex(h[0, 1]), float(h[1, 1].real))

    @property
    def hermitian(self) -> np.ndarray:
        b = self.coeff_b
        return np.array([[self.coeff_a, b], [np.conj(b), self.coeff_c]], dtype=np.complex128)

    @property
    def discriminant(self) -> float:
        return abs(self.coeff_b) ** 2 - self.coeff_a * self.coeff_c

    @property
    def kind(self) -> str:
        # radius above 1/_KIND_EPS reads as a line; b = 0 is always a disk about 0
        a = self.coeff_a
        if self.coeff_b != 0 and abs(a) <= _KIND_EPS * math.sqrt(self.discriminant):
            return "halfplane"
        return "disk" if a > 0 else "codisk"

    @property
    def center(self) -> complex:
        if self.kind == "halfplane":
            raise DomainError("A half-plane has no center")
        return -self.coeff_b / self.coeff_a

    @property
    def radius(self) -> float:
        if self.kind == "halfplane":
            raise DomainError("A half-plane has no radius")
        return math.sqrt(self.discriminant) / abs(self.coeff_a)

    @property
    def angle(self) -> float:
        """Outer normal direction ω of a half-plane {Re(e^{-iω} z) ≤ offset}"""
        return float(np.angle(self.coeff_b))

    @property
    def offset(self) -> float:
        return -self.coeff_c / (2.0 * abs(self.coeff_b))

    def value(self, z: Point) -> float:
        if z is None:
            return self.coeff_a
        z = complex(z)
        return self.coeff_a * abs(z) ** 2 + 2.0 * (np.conj(self.coeff_b) * z).real + self.coeff_c

    def contains(self, z: Point, slack: float = 0.0) -> bool:
        return self.value(z) <= slack

    def boundary_sample(self, k: int) -> List[Point]:
        """k points on the boundary circline (a line also yields ∞ first)"""
        if self.kind == "halfplane":
            normal = np.exp(1j * self.angle)
            base = self.offset * normal
            ts = np.tan(np.pi * (np.arange(1, k) / k - 0.5))
            return [None] + [complex(base + 1j * normal * t) for t in ts]
        thetas = 2.0 * np.pi * np.arange(k) / k
        return [complex(p) for p in self.center + self.radius * np.exp(1j * thetas)]


def disk(center: complex, radius: float) -> SphereDisk:
    """{|z - center| ≤ radius}"""
    if radius <= 0:
        raise DomainError(f"Radius must be positive, got {radius}")
    center = complex(center)
    return SphereDisk(1.0, -center, abs(center) ** 2 - radius ** 2)


def codisk(center: complex, radius: float) -> SphereDisk:
    """{|z - center| ≥ radius} ∪ {∞}"""
    if radius <= 0:
        raise DomainError(f"Radius must be positive, got {radius}")
    center = complex(center)
    return SphereDisk(-1.0, center, radius ** 2 - abs(center) ** 2)


def halfplane(angle: float, offset: float) -> SphereDisk:
    """{Re(e^{-iω} z) ≤ offset} ∪ {∞}"""
    return SphereDisk(0.0, 0.5 * np.exp(1j * angle), -float(offset))


# ========================================
# Möbius maps
# ========================================

@dataclass(frozen=True)
class MoebiusMap:
    """z ↦ (m11 z + m12) / (m21 z + m22), stored with |det| = 1"""

    m11: complex
    m12: complex
    m21: complex
    m22: complex

    def __post_init__(self):
        m = np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=np.complex128)
        det = np.linalg.det(m)
        scale = np.abs(m).max()
        if scale == 0.0 or abs(det) < 1e-12 * scale ** 2:
            raise InvalidInputError("Möbius map has (numerically) zero determinant")
        m = m / np.sqrt(abs(det))
        for name, value in zip(("m11", "m12", "m21", "m22"), m.ravel()):
            object.__setattr__(self, name, complex(value))

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "MoebiusMap":
        return cls(*(complex(x) for x in np.asarray(m).ravel()))

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1, 0, 0, 1)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=np.complex128)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.m22, -self.m12, -self.m21, self.m11)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """self ∘ other"""
        return MoebiusMap.from_matrix(self.matrix @ other.matrix)

    def apply(self, z: Point) -> Point:
        return _dehomogenize(self.matrix @ _homogeneous(z))


def apply_map(m: MoebiusMap, d: SphereDisk) -> SphereDisk:
    """
    Image of a disk under a Möbius map

    Congruence of the coefficient matrix by the inverse map: H' = (M⁻¹)* H M⁻¹.
    """
    minv = m.inverse().matrix
    return SphereDisk.from_hermitian(np.conj(minv.T) @ d.hermitian @ minv)


def moebius_of_matrix(m: MoebiusMap, a: Matrix) -> Matrix:
    """
    Operator image φ(A) = (m11 A + m12)(m21 A + m22)⁻¹

    Raises:
        PoleMeetsSpectrumError: the pole of φ lies on the spectrum of A
    """
    a = as_matrix(a)
    eye = identity(a.shape[0])
    numerator = m.m11 * a + m.m12 * eye
    denominator = m.m21 * a + m.m22 * eye
    try:
        return solve(denominator, numerator)
    except SingularMatrixError as e:
        logger.error(f"❌ Möbius pole meets the spectrum: {e}")
        raise PoleMeetsSpectrumError(f"Pole of the Möbius map lies on σ(A): {e}") from e


# ========================================
# Classification
# ========================================

class CaseLabel(str, Enum):
    SINGLETON = "Singleton"
    CIRCLINE = "Circline"
    SECTOR_OR_STRIP = "SectorOrStrip"
    LENS = "Lens"
    RING = "Ring"
    TANGENT = "Tangent"
    NESTED = "Nested"
    IDENTICAL = "Identical"
    EMPTY = "Empty"


@dataclass(frozen=True)
class Classification:
    case_label: CaseLabel
    boundary_points: List[Point] = field(default_factory=list)
    canonical_map: Optional[MoebiusMap] = None
    canonical_R: Optional[float] = None


def _unit_form(d: SphereDisk) -> np.ndarray:
    """Coefficient matrix scaled to det = -1"""
    return d.hermitian / math.sqrt(d.discriminant)


def _inversive_product(h1: np.ndarray, h2: np.ndarray) -> float:
    """Polarized determinant of two unit forms; |ip| <, =, > 1 for 2, 1, 0 common points"""
    a1, b1, c1 = h1[0, 0].real, h1[0, 1], h1[1, 1].real
    a2, b2, c2 = h2[0, 0].real, h2[0, 1], h2[1, 1].real
    return float(0.5 * (a1 * c2 + a2 * c1) - (b1 * np.conj(b2)).real)


def _frame(h: np.ndarray) -> np.ndarray:
    """P with P* h P = diag(1, -1): the unit disk in P-coordinates is the disk of h"""
    w, v = np.linalg.eigh(h)
    return np.column_stack([v[:, 1] / math.sqrt(w[1]), v[:, 0] / math.sqrt(-w[0])])


def _rank_one_point(k: np.ndarray) -> np.ndarray:
    """Zero of the (nearly) rank-one semidefinite form k"""
    w, v = np.linalg.eigh(k)
    dominant = v[:, int(np.argmax(np.abs(w)))]
    return _orthogonal_point(dominant)


def _crossing_points(h1: np.ndarray, h2: np.ndarray) -> List[Point]:
    p = _frame(h1)
    g = np.conj(p.T) @ h2 @ p
    a, b, c = g[0, 0].real, g[0, 1], g[1, 1].real
    cosine = float(np.clip(-(a + c) / (2.0 * abs(b)), -1.0, 1.0))
    beta, spread = float(np.angle(b)), math.acos(cosine)
    points = []
    for theta in (beta + spread, beta - spread):
        points.append(_dehomogenize(p @ np.array([np.exp(1j * theta), 1.0])))
    return points


def _both_lines(d1: SphereDisk, d2: SphereDisk) -> bool:
    return d1.kind == "halfplane" and d2.kind == "halfplane"


def _classify_crossing(d1: SphereDisk, d2: SphereDisk, h1, h2) -> Classification:
    points = _crossing_points(h1, h2)
    if _both_lines(d1, d2) or any(p is None for p in points):
        finite = [p for p in points if p is not None]
        vertex = finite[0] if finite else None
        return Classification(CaseLabel.SECTOR_OR_STRIP, [vertex, None])
    lam1 = points[0]
    phi = MoebiusMap(0, 1, -1, lam1)
    return Classification(CaseLabel.LENS, points, canonical_map=phi)


def _classify_tangent(d1: SphereDisk, d2: SphereDisk, h1, h2, ip: float, tol: float) -> Classification:
    v = _rank_one_point(h1 + ip * h2)
    lam = _dehomogenize(v)
    if _both_lines(d1, d2):
        lam = None
        v = _homogeneous(None)
    # Send the tangency point to ∞: both circlines become parallel lines
    other = np.array([0, 1]) if abs(v[0]) >= abs(v[1]) else np.array([1, 0])
    q = np.column_stack([v, other]).astype(np.complex128)
    lines = []
    for h in (h1, h2):
        g = np.conj(q.T) @ h @ q
        b, c = g[0, 1], g[1, 1].real
        lines.append((b / abs(b), c / abs(b)))
    (b1, c1), (b2, c2) = lines
    if (b2 * np.conj(b1)).real > 0:
        return Classification(CaseLabel.TANGENT, [lam])
    gap = c1 + c2
    if abs(gap) <= tol:
        raise AmbiguousClassificationError("Tangent lines nearly coincide", (CaseLabel.CIRCLINE.value, CaseLabel.TANGENT.value))
    if gap > 0:
        return Classification(CaseLabel.SINGLETON, [lam])
    if lam is None:
        return Classification(CaseLabel.SECTOR_OR_STRIP, [None])
    return Classification(CaseLabel.TANGENT, [lam])


def _limit_points(h1: np.ndarray, h2: np.ndarray, ip: float) -> Tuple[np.ndarray, np.ndarray]:
    """Common symmetric points: zeros of the two degenerate members of the pencil h1 - t h2"""
    root = math.sqrt(ip * ip - 1.0)
    return tuple(_rank_one_point(h1 - t * h2) for t in (-ip + root, -ip - root))


def _concentric(h1, h2, ip) -> Tuple[np.ndarray, List[Tuple[float, float]]]:
    """Map (homogeneous matrix) sending the limit points to 0 and ∞, plus (a', ρ²) per disk"""
    vp, vq = _limit_points(h1, h2, ip)
    t = np.array([[0, 1], [1, 0]], dtype=np.complex128) @ np.linalg.inv(np.column_stack([vp, vq]))
    tinv = np.linalg.inv(t)
    frames = []
    for h in (h1, h2):
        g = np.conj(tinv.T) @ h @ tinv
        a, c = g[0, 0].real, g[1, 1].real
        frames.append((a, -c / a))
    return t, frames


def _classify_disjoint(h1, h2, ip) -> Classification:
    t, ((a1, rho1_sq), (a2, rho2_sq)) = _concentric(h1, h2, ip)
    if (a1 > 0) == (a2 > 0):
        return Classification(CaseLabel.NESTED, [])
    rho_in_sq, rho_out_sq = (rho1_sq, rho2_sq) if a1 > 0 else (rho2_sq, rho1_sq)
    if rho_out_sq > rho_in_sq:
        return Classification(CaseLabel.EMPTY, [])
    R = (rho_in_sq / rho_out_sq) ** 0.25
    k = (rho_in_sq * rho_out_sq) ** -0.25
    if a1 > 0:
        final = np.diag([k, 1.0]) @ t
    else:
        # d1 is the exterior one: invert first, radii become 1/ρ
        k = (rho_in_sq * rho_out_sq) ** 0.25
        final = np.diag([k, 1.0]) @ np.array([[0, 1], [1, 0]]) @ t
    return Classification(CaseLabel.RING, [], canonical_map=MoebiusMap.from_matrix(final), canonical_R=float(R))


def classify(d1: SphereDisk, d2: SphereDisk, tol: Optional[float] = None) -> Classification:
    """
    Classify the intersection of two closed disks of the sphere

    Args:
        d1, d2: the disks
        tol: tangency/coincidence tolerance (default GEOMETRY_TOL)

    Returns:
        Classification with witnesses and, for Lens/Ring, the canonical map

    Raises:
        AmbiguousClassificationError: decision falls in the (tol, 2 tol] band
    """
    tol = settings.GEOMETRY_TOL if tol is None else tol
    if tol <= 0:
        raise DomainError(f"Tolerance must be positive, got {tol}")
    h1, h2 = _unit_form(d1), _unit_form(d2)
    scale = max(np.abs(h1).max(), np.abs(h2).max())

    if np.abs(h1 - h2).max() <= tol * scale:
        return Classification(CaseLabel.IDENTICAL, [])
    if np.abs(h1 + h2).max() <= tol * scale:
        return Classification(CaseLabel.CIRCLINE, [])

    ip = _inversive_product(h1, h2)
    gap = abs(ip) - 1.0
    logger.debug(f"Inversive product {ip:.15g} (gap {gap:.3e})")

    if abs(gap) <= tol:
        return _classify_tangent(d1, d2, h1, h2, ip, tol)
    if abs(gap) <= 2.0 * tol:
        generic = _classify_crossing(d1, d2, h1, h2) if gap < 0 else _classify_disjoint(h1, h2, ip)
        logger.warning(f"⚠️  Ambiguous classification (gap {gap:.3e}, tol {tol:.1e})")
        raise AmbiguousClassificationError(
            f"Boundary tangency undecidable within tolerance {tol:g}",
            (CaseLabel.TANGENT.value, generic.case_label.value),
        )
    if gap < 0:
        return _classify_crossing(d1, d2, h1, h2)
    return _classify_disjoint(h1, h2, ip)


def circline_intersection_count(d1: SphereDisk, d2: SphereDisk, tol: Optional[float] = None) -> Optional[int]:
    """Common points of the boundary circlines on the sphere (None for infinitely many)"""
    tol = settings.GEOMETRY_TOL if tol is None else tol
    h1, h2 = _unit_form(d1), _unit_form(d2)
    scale = max(np.abs(h1).max(), np.abs(h2).max())
    if min(np.abs(h1 - h2).max(), np.abs(h1 + h2).max()) <= tol * scale:
        return None
    gap = abs(_inversive_product(h1, h2)) - 1.0
    if abs(gap) <= tol:
        return 1
    return 2 if gap < 0 else 0


def ring_modulus(d1: SphereDisk, d2: SphereDisk) -> float:
    """R of the balanced ring conformally equivalent to the two disjoint boundaries"""
    ip = abs(_inversive_product(_unit_form(d1), _unit_form(d2)))
    if ip <= 1.0:
        raise WrongCaseError("Boundaries are not disjoint")
    return math.exp(0.5 * math.acosh(ip))


def normalize_annulus(d1: SphereDisk, d2: SphereDisk) -> Tuple[MoebiusMap, float]:
    """
    Möbius map T and R > 1 with T(d1) = {|z| ≤ R}, T(d2) = {|z| ≥ 1/R}

    Raises:
        WrongCaseError: the pair is not ring-shaped
    """
    c = classify(d1, d2)
    if c.case_label != CaseLabel.RING:
        logger.error(f"❌ normalize_annulus called on a {c.case_label.value} pair")
        raise WrongCaseError(f"Expected a Ring pair, got {c.case_label.value}")
    return c.canonical_map, c.canonical_R


# ========================================
# Spectral-set certification
# ========================================

@dataclass(frozen=True)
class SpectralCertificate:
    """Outcome of the von Neumann test; truthy iff the disk is spectral"""

    spectral: bool
    kind: str
    measured: float
    threshold: float
    singular: bool = False

    def __bool__(self) -> bool:
        return self.spectral


def certify_spectral(d: SphereDisk, a: Matrix) -> SpectralCertificate:
    """
    Von Neumann criterion for a closed disk of the sphere

    disk: ‖A - αI‖ ≤ r; exterior disk: ‖(A - αI)⁻¹‖ ≤ 1/r;
    half-plane {Re(e^{-iω} z) ≤ h}: max eig Re(e^{-iω} A) ≤ h.
    """
    a = as_matrix(a)
    kind = d.kind
    if kind == "halfplane":
        measured, threshold = numerical_range_support(a, d.angle), d.offset
    else:
        shifted = a - d.center * identity(a.shape[0])
        if kind == "disk":
            measured, threshold = spectral_norm(shifted), d.radius
        else:
            threshold = 1.0 / d.radius
            try:
                measured = spectral_norm(inverse(shifted))
            except SingularMatrixError:
                logger.warning("⚠️  Exterior-disk center lies on the spectrum; not spectral")
                return SpectralCertificate(False, kind, float("inf"), threshold, singular=True)
    slack = settings.SPECTRAL_SLACK * max(1.0, abs(threshold))
    return SpectralCertificate(bool(measured <= threshold + slack), kind, float(measured), float(threshold))


# ========================================
# Two-disk constants
# ========================================

_COMPLETE_SPECTRAL = {CaseLabel.SINGLETON, CaseLabel.CIRCLINE, CaseLabel.IDENTICAL, CaseLabel.NESTED}
_SECTOR_LENS_CONSTANT = 2.0 + 2.0 / math.sqrt(3.0)


def intersection_constant(c: Classification) -> Optional[float]:
    """Complete K-spectral constant of X₁ ∩ X₂ when both disks are spectral"""
    from bounds import thm1_upper

    if c.case_label in _COMPLETE_SPECTRAL:
        return 1.0
    if c.case_label == CaseLabel.RING:
        return thm1_upper(c.canonical_R)
    if c.case_label == CaseLabel.EMPTY:
        return None
    return _SECTOR_LENS_CONSTANT


@dataclass(frozen=True)
class IntersectionCertificate:
    classification: Classification
    certificates: Tuple[SpectralCertificate, SpectralCertificate]
    constant: Optional[float]
    reduced: Optional[Tuple[SpectralCertificate, SpectralCertificate]] = None

    @property
    def spectral(self) -> bool:
        return all(self.certificates)


def certify_intersection(d1: SphereDisk, d2: SphereDisk, a: Matrix, tol: Optional[float] = None) -> IntersectionCertificate:
    """
    Certify both disks, classify X₁ ∩ X₂ and report its K constant

    For Lens and Ring pairs the operator is also carried to B = φ(A) by the
    canonical map and the image disks are certified for B.
    """
    c = classify(d1, d2, tol)
    certs = (certify_spectral(d1, a), certify_spectral(d2, a))
    reduced = None
    if c.canonical_map is not None:
        try:
            b = moebius_of_matrix(c.canonical_map, a)
            reduced = tuple(certify_spectral(apply_map(c.canonical_map, d), b) for d in (d1, d2))
        except PoleMeetsSpectrumError:
            logger.warning(f"⚠️  Canonical map of the {c.case_label.value} case is singular at A; no reduction")
    constant = intersection_constant(c) if all(certs) else None
    return IntersectionCertificate(c, certs, constant, reduced)
