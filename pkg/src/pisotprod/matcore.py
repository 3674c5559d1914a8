"""Exact primitives for nonnegative column-allowable 2x2 matrices.

Entries live in `fractions.Fraction`, so determinants, column distances
and the one-sided contraction bounds are exact.  Quantities that involve
square roots or logarithms (contraction coefficient, Perron data, column
angle, Hilbert distance) are evaluated with mpmath at `DPS` digits,
well above the 64-bit mantissa needed for the 1e-12 tolerances used
throughout the package.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import DomainError

#: working precision (decimal digits) for irrational quantities
DPS = int(os.environ.get("PISOTPROD_DPS", "30"))

#: default tolerance attached to floating-point comparisons
FLOAT_TOL = 1e-12

Scalar = Fraction | int


def as_fraction(x) -> Fraction:
    """Coerce ints, Fractions, "p/q" / decimal strings and floats to Fraction.

    Floats convert through their exact binary value; use decimal strings
    when a literal decimal is meant.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise DomainError("boolean is not a scalar")
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise DomainError(f"cannot interpret {x!r} as an exact scalar")


def _mpf(x: Fraction) -> mpmath.mpf:
    return mpmath.mpf(x.numerator) / mpmath.mpf(x.denominator)


@dataclass(frozen=True)
class Vec2:
    """Nonnegative column vector (x1, x2) with x1 + x2 > 0."""

    x1: Fraction
    x2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x1", as_fraction(self.x1))
        object.__setattr__(self, "x2", as_fraction(self.x2))
        if self.x1 < 0 or self.x2 < 0:
            raise DomainError(f"vector {self} has a negative component")
        if self.x1 + self.x2 == 0:
            raise DomainError("null vector")

    @property
    def total(self) -> Fraction:
        return self.x1 + self.x2

    def is_positive(self) -> bool:
        return self.x1 > 0 and self.x2 > 0

    def scaled(self, c) -> "Vec2":
        c = as_fraction(c)
        return Vec2(c * self.x1, c * self.x2)

    def as_floats(self) -> tuple[float, float]:
        return (float(self.x1), float(self.x2))


def normalize(v: Vec2) -> Vec2:
    """Project onto the probability simplex: v / (x1 + x2)."""
    t = v.total
    if t == 0:  # unreachable through Vec2, kept for raw tuples
        raise DomainError("cannot normalize a null vector")
    return Vec2(v.x1 / t, v.x2 / t)


def first_coordinate(v: Vec2) -> Fraction:
    """First coordinate of the normalized vector, n(X) = x1/(x1+x2)."""
    return v.x1 / v.total


@dataclass(frozen=True)
class Mat2:
    """Nonnegative column-allowable matrix ((a b)(c d))."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if min(self.a, self.b, self.c, self.d) < 0:
            raise DomainError(f"matrix {self.rows()} has a negative entry")
        if self.a + self.c == 0 or self.b + self.d == 0:
            raise DomainError(f"matrix {self.rows()} has a null column")

    @classmethod
    def from_rows(cls, rows) -> "Mat2":
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1, 0, 0, 1)

    def rows(self) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
        return ((self.a, self.b), (self.c, self.d))

    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def transpose(self) -> "Mat2":
        return Mat2(self.a, self.c, self.b, self.d)

    def is_positive(self) -> bool:
        return min(self.a, self.b, self.c, self.d) > 0

    def has_null_row(self) -> bool:
        return (self.a == 0 and self.b == 0) or (self.c == 0 and self.d == 0)

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def mul_vec(self, v: Vec2) -> Vec2:
        return Vec2(self.a * v.x1 + self.b * v.x2, self.c * v.x1 + self.d * v.x2)

    def scaled(self, c) -> "Mat2":
        c = as_fraction(c)
        if c <= 0:
            raise DomainError("scale factor must be positive")
        return Mat2(c * self.a, c * self.b, c * self.c, c * self.d)

    def max_entry(self) -> Fraction:
        return max(self.a, self.b, self.c, self.d)

    def as_floats(self) -> tuple[float, float, float, float]:
        return (float(self.a), float(self.b), float(self.c), float(self.d))


@dataclass
class CoefficientReport:
    """Projective distances and contraction data of a single matrix.

    `d_columns`, `d_rows`, `tau1`, `tau2` are exact rationals; `tau`,
    `angle` and `hilbert` are mpmath floats unless an exact shortcut
    applies.  `tau2` and `hilbert` are only defined for positive matrices.
    """

    d_columns: Fraction
    d_rows: Fraction
    angle: object
    hilbert: object | None = None
    tau: object | None = None
    tau1: Fraction | None = None
    tau2: Fraction | None = None


def column_distance(m: Mat2) -> Fraction:
    """|det A| / ((a+c)(b+d)), the gap between normalized columns."""
    return abs(m.det()) / ((m.a + m.c) * (m.b + m.d))


def row_distance(m: Mat2) -> Fraction:
    return column_distance(m.transpose())


def column_angle(m: Mat2) -> mpmath.mpf:
    """Unsigned angle between the two column directions.

    arctan of a ratio with zero denominator counts as the right angle;
    column-allowability rules out 0/0.
    """
    with mpmath.workdps(DPS):
        t1 = mpmath.atan2(_mpf(m.a), _mpf(m.c))
        t2 = mpmath.atan2(_mpf(m.b), _mpf(m.d))
        return abs(t1 - t2)


def hilbert_distance(m: Mat2) -> mpmath.mpf:
    """|log(a/c) - log(b/d)| between the columns of a positive matrix."""
    if not m.is_positive():
        raise DomainError("Hilbert distance needs a positive matrix")
    with mpmath.workdps(DPS):
        return abs(mpmath.log(_mpf(m.a * m.d / (m.b * m.c))))


def column_metrics(m: Mat2) -> CoefficientReport:
    """Distance/angle metrics of the columns (contraction fields unset)."""
    dc = column_distance(m)
    dr = row_distance(m)
    hil = hilbert_distance(m) if m.is_positive() else None
    return CoefficientReport(d_columns=dc, d_rows=dr, angle=column_angle(m), hilbert=hil)


def contraction_coefficient(m: Mat2):
    """Worst-case shrink factor of d_columns under right multiplication.

    Equals |sqrt(ad) - sqrt(bc)| / (sqrt(ad) + sqrt(bc)) when no row is
    null, and 0 otherwise.  Returns an exact Fraction in the degenerate
    cases (null row / zero determinant give 0, ad*bc = 0 gives 1) and an
    mpmath float otherwise.
    """
    if m.has_null_row():
        return Fraction(0)
    ad, bc = m.a * m.d, m.b * m.c
    if ad == bc:
        return Fraction(0)
    if ad == 0 or bc == 0:
        return Fraction(1)
    with mpmath.workdps(DPS):
        s, t = mpmath.sqrt(_mpf(ad)), mpmath.sqrt(_mpf(bc))
        return abs(s - t) / (s + t)


def left_contraction_bounds(m: Mat2) -> tuple[Fraction, Fraction | None]:
    """Exact bounds for left multiplication.

    First value: sup of d_columns(AA')/d_columns(A'), equal to
    |det A| / min((a+c)^2, (b+d)^2).  Second value (positive A only):
    upper bound |det A| / (min(a,b) min(c,d)) for d_rows(AA')/d_columns(A').
    """
    det = abs(m.det())
    tau1 = det / min((m.a + m.c) ** 2, (m.b + m.d) ** 2)
    tau2 = None
    if m.is_positive():
        tau2 = det / (min(m.a, m.b) * min(m.c, m.d))
    return tau1, tau2


def coefficient_report(m: Mat2) -> CoefficientReport:
    """All metrics of `column_metrics` plus the contraction coefficients."""
    rep = column_metrics(m)
    rep.tau = contraction_coefficient(m)
    rep.tau1, rep.tau2 = left_contraction_bounds(m)
    return rep


def _rational_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    p, q = x.numerator, x.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


def perron_eigenpair(m: Mat2):
    """Maximal eigenvalue and a nonnegative eigenvector, normalized to sum 1.

    The pair is exact (Fractions) whenever the discriminant
    (a-d)^2 + 4bc is a rational square, mpmath floats otherwise.  For a
    positive multiple of the identity every direction is an eigenvector
    and (1/2, 1/2) is returned by convention.
    """
    a, b, c, d = m.a, m.b, m.c, m.d
    disc = (a - d) ** 2 + 4 * b * c
    if disc == 0:
        # forced shape ((a b)(0 a)) or ((a 0)(c a))
        lam = a
        if b == 0 and c == 0:
            return lam, (Fraction(1, 2), Fraction(1, 2))
        if c == 0:
            return lam, (Fraction(1), Fraction(0))
        return lam, (Fraction(0), Fraction(1))
    root = _rational_sqrt(disc)
    if root is not None:
        lam = (a + d + root) / 2
        v1, v2 = b, lam - a
        if v1 == 0 and v2 == 0:
            v1, v2 = lam - d, c
        s = v1 + v2
        return lam, (v1 / s, v2 / s)
    # non-square discriminant forces b*c > 0, so (b, lam - a) never vanishes
    with mpmath.workdps(DPS):
        rootf = mpmath.sqrt(_mpf(disc))
        lam = (_mpf(a + d) + rootf) / 2
        v1, v2 = _mpf(b), lam - _mpf(a)
        s = v1 + v2
        return lam, (v1 / s, v2 / s)


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def _in_cone(x, ray1, ray2, tol=0.0) -> bool:
    """Is direction x inside the closed cone spanned by ray1, ray2?"""
    orient = _cross(ray1, ray2)
    c1 = _cross(ray1, x)
    c2 = _cross(x, ray2)
    if orient == 0:
        return abs(c1) <= tol
    if orient < 0:
        orient, c1, c2 = -orient, -c1, -c2
    return c1 >= -tol and c2 >= -tol


def cone_is_stable(m: Mat2, ray1: Vec2, ray2: Vec2, check: bool = True) -> bool:
    """Does A map the cone spanned by the two rays into itself?

    With `check=True` the hypotheses det A >= 0 and "Perron vector of A
    inside the cone" are verified first and a DomainError is raised when
    they fail (the stability conclusion is only guaranteed under them).
    """
    r1 = (ray1.x1, ray1.x2)
    r2 = (ray2.x1, ray2.x2)
    if check:
        if m.det() < 0:
            raise DomainError("cone stability requires det A >= 0")
        lam, v = perron_eigenpair(m)
        if isinstance(v[0], Fraction):
            inside = _in_cone(v, r1, r2)
        else:
            scale = float(max(abs(v[0]), abs(v[1])))
            inside = _in_cone(
                (float(v[0]), float(v[1])),
                (float(r1[0]), float(r1[1])),
                (float(r2[0]), float(r2[1])),
                tol=FLOAT_TOL * max(scale, 1.0),
            )
        if not inside:
            raise DomainError("Perron vector lies outside the cone")
    img1 = m.mul_vec(ray1)
    img2 = m.mul_vec(ray2)
    return _in_cone((img1.x1, img1.x2), r1, r2) and _in_cone((img2.x1, img2.x2), r1, r2)
