"""Exact arithmetic in Q(beta) for beta^2 = a*beta + b, and the digit
machinery of quadratic Pisot numeration.

All order decisions on beta-numbers are made by rational sign tests
against the defining polynomial; no floating point enters any comparison.
A 50-digit mpmath shadow is available for tests via `BetaNumber.to_mpf`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

import mpmath

from .errors import DomainError, GuardError
from .matcore import as_fraction

__all__ = [
    "QuadraticBase",
    "BetaNumber",
    "AffineMap",
    "NumerationSystem",
    "reachable_set",
    "build_system",
]

#: node budget for the carry-set closure (finiteness holds for Pisot beta;
#: the cap only guards misuse)
REACHABLE_CAP = 100_000

Mat3 = tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class QuadraticBase:
    """The larger root beta of x^2 = a x + b with conjugate in (-1, 0)."""

    a: int
    b: int

    def __post_init__(self):
        if not (isinstance(self.a, int) and isinstance(self.b, int)):
            raise DomainError("base coefficients must be integers")
        if not 1 <= self.b <= self.a:
            raise DomainError(f"need 1 <= b <= a, got a={self.a}, b={self.b}")
        disc = self.a * self.a + 4 * self.b
        r = math.isqrt(disc)
        if r * r == disc:
            raise DomainError(f"beta is rational for a={self.a}, b={self.b}")
        # 1 <= b <= a already forces the conjugate inside (-1, 0)

    def beta_float(self) -> float:
        return (self.a + math.sqrt(self.a * self.a + 4 * self.b)) / 2

    def conjugate_float(self) -> float:
        return (self.a - math.sqrt(self.a * self.a + 4 * self.b)) / 2

    def beta_mpf(self, dps: int = 50) -> mpmath.mpf:
        with mpmath.workdps(dps):
            return (self.a + mpmath.sqrt(self.a * self.a + 4 * self.b)) / 2

    def num(self, u, v=0) -> "BetaNumber":
        return BetaNumber(self, as_fraction(u), as_fraction(v))

    @property
    def zero(self) -> "BetaNumber":
        return self.num(0)

    @property
    def one(self) -> "BetaNumber":
        return self.num(1)

    @property
    def beta(self) -> "BetaNumber":
        return self.num(0, 1)


def _same_base(x: "BetaNumber", y: "BetaNumber"):
    if x.base != y.base:
        raise DomainError(f"mixed bases {x.base} and {y.base}")


@total_ordering
@dataclass(frozen=True)
class BetaNumber:
    """u + v*beta with rational u, v; representation is unique."""

    base: QuadraticBase
    u: Fraction
    v: Fraction

    def __post_init__(self):
        object.__setattr__(self, "u", as_fraction(self.u))
        object.__setattr__(self, "v", as_fraction(self.v))

    def _coerce(self, other) -> "BetaNumber":
        if isinstance(other, BetaNumber):
            _same_base(self, other)
            return other
        return self.base.num(as_fraction(other))

    def __add__(self, other):
        o = self._coerce(other)
        return BetaNumber(self.base, self.u + o.u, self.v + o.v)

    __radd__ = __add__

    def __neg__(self):
        return BetaNumber(self.base, -self.u, -self.v)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        # (u1 + v1 b)(u2 + v2 b) with b^2 = a b + B
        o = self._coerce(other)
        a, bb = self.base.a, self.base.b
        u = self.u * o.u + bb * self.v * o.v
        v = self.u * o.v + self.v * o.u + a * self.v * o.v
        return BetaNumber(self.base, u, v)

    __rmul__ = __mul__

    def conjugate_partner(self) -> "BetaNumber":
        """u + v*beta' rewritten over beta: (u + a v) - v*beta."""
        return BetaNumber(self.base, self.u + self.base.a * self.v, -self.v)

    def field_norm(self) -> Fraction:
        """Product with the conjugate: u^2 + a u v - b v^2 (rational)."""
        return self.u * self.u + self.base.a * self.u * self.v - self.base.b * self.v * self.v

    def inverse(self) -> "BetaNumber":
        n = self.field_norm()
        if n == 0:
            raise DomainError("division by zero in Q(beta)")
        c = self.conjugate_partner()
        return BetaNumber(self.base, c.u / n, c.v / n)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def sign(self) -> int:
        """Exact sign of u + v*beta.

        For v != 0 compare beta with t = -u/v through the sign of
        P(t) = t^2 - a t - b and the side of the vertex a/2; P has no
        rational roots, so the outcome is always strict.
        """
        if self.v == 0:
            return (self.u > 0) - (self.u < 0)
        a, b = self.base.a, self.base.b
        t = -self.u / self.v
        p = t * t - a * t - b
        if p == 0:  # impossible for irrational beta
            raise GuardError("rational root of the defining polynomial")
        beta_above_t = p < 0 or (p > 0 and 2 * t < a)
        if self.v > 0:
            return 1 if beta_above_t else -1
        return -1 if beta_above_t else 1

    def __eq__(self, other):
        if isinstance(other, BetaNumber) and other.base != self.base:
            return False
        o = self._coerce(other)
        return self.u == o.u and self.v == o.v

    def __lt__(self, other):
        return (self - self._coerce(other)).sign() < 0

    def __hash__(self):
        return hash((self.base, self.u, self.v))

    def __float__(self):
        return float(self.u) + float(self.v) * self.base.beta_float()

    def to_mpf(self, dps: int = 50) -> mpmath.mpf:
        with mpmath.workdps(dps):
            beta = self.base.beta_mpf(dps)
            return (
                mpmath.mpf(self.u.numerator) / self.u.denominator
                + mpmath.mpf(self.v.numerator) / self.v.denominator * beta
            )

    def __repr__(self):
        return f"({self.u} + {self.v}*beta[{self.base.a},{self.base.b}])"


def reachable_set(base: QuadraticBase, digit_count: int, cap: int = REACHABLE_CAP) -> tuple[BetaNumber, ...]:
    """Closure of {0} under y = beta*x + (e - k), kept inside ]-1, alpha[.

    e runs over the carry alphabet {0, ..., ceil(beta)-1} and k over the
    digits {0, ..., digit_count-1}; membership tests are exact and strict.
    Returned in discovery order (0 first).  Exceeding `cap` raises rather
    than truncating.
    """
    if digit_count <= base.a:  # digit_count > beta requires >= a+1
        raise DomainError("digit count must exceed beta")
    alpha = base.num(digit_count - 1) * (base.beta - 1).inverse()
    minus_one = base.num(-1)
    carry_alphabet = range(base.a + 1)
    digits = range(digit_count)
    found: list[BetaNumber] = [base.zero]
    seen = {base.zero}
    frontier = [base.zero]
    while frontier:
        nxt: list[BetaNumber] = []
        for x in frontier:
            bx = x * base.beta
            for e in carry_alphabet:
                for k in digits:
                    y = bx + (e - k)
                    if y in seen:
                        continue
                    if minus_one < y < alpha:
                        seen.add(y)
                        found.append(y)
                        nxt.append(y)
                        if len(found) > cap:
                            raise DomainError(f"carry set exceeded cap {cap}")
        frontier = nxt
    return tuple(found)


@dataclass(frozen=True)
class AffineMap:
    """x -> scale*x + shift with coefficients in Q(beta)."""

    scale: BetaNumber
    shift: BetaNumber

    def __call__(self, x: BetaNumber) -> BetaNumber:
        return self.scale * x + self.shift

    def compose(self, other: "AffineMap") -> "AffineMap":
        return AffineMap(self.scale * other.scale, self.scale * other.shift + self.shift)


def _p_or_zero(p: tuple[Fraction, ...], i: int) -> Fraction:
    return p[i] if 0 <= i < len(p) else Fraction(0)


def _digit_matrix_from_rule(base, p, carries, eps) -> Mat3:
    """Entries p_k at (i, j) when k = eps + beta*i_i - i_j is a digit."""
    d = len(p)
    rows = []
    for ii in carries:
        row = []
        for jj in carries:
            z = ii * base.beta + eps - jj
            if z.v == 0 and z.u.denominator == 1 and 0 <= z.u < d:
                row.append(p[int(z.u)])
            else:
                row.append(Fraction(0))
        rows.append(tuple(row))
    return tuple(rows)


def _digit_matrix_closed_form(p, a, b, eps) -> Mat3:
    return (
        (_p_or_zero(p, eps), _p_or_zero(p, eps - 1), Fraction(0)),
        (Fraction(0), Fraction(0), _p_or_zero(p, a + eps)),
        (_p_or_zero(p, b + eps), _p_or_zero(p, b + eps - 1), Fraction(0)),
    )


def mat3_mul(x: Mat3, y: Mat3) -> Mat3:
    return tuple(
        tuple(sum(x[i][k] * y[k][j] for k in range(3)) for j in range(3)) for i in range(3)
    )


def mat3_vec(x: Mat3, v) -> tuple[Fraction, ...]:
    return tuple(sum(x[i][k] * v[k] for k in range(3)) for i in range(3))


def row_mat3(r, x: Mat3) -> tuple[Fraction, ...]:
    return tuple(sum(r[k] * x[k][j] for k in range(3)) for j in range(3))


def _stationary_kernel(aggregate: Mat3) -> tuple[Fraction, Fraction, Fraction]:
    """Exact kernel vector of (aggregate - I), normalized to v1 + v2 = 1.

    The aggregate of the cylinder generators has eigenvalue exactly 1,
    so the fixed point is rational; a kernel of dimension != 1 or a
    non-positive solution is an internal error.
    """
    rows = [
        [aggregate[i][j] - (1 if i == j else 0) for j in range(3)] for i in range(3)
    ]
    # Gauss-Jordan, tracking pivot columns
    pivots = []
    r = 0
    for col in range(3):
        pivot = next((k for k in range(r, 3) if rows[k][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][col]
        rows[r] = [x / pv for x in rows[r]]
        for k in range(3):
            if k != r and rows[k][col] != 0:
                f = rows[k][col]
                rows[k] = [x - f * y for x, y in zip(rows[k], rows[r])]
        pivots.append(col)
        r += 1
    if r != 2:
        raise GuardError(f"stationary kernel has dimension {3 - r}, expected 1")
    free = next(c for c in range(3) if c not in pivots)
    sol = [Fraction(0)] * 3
    sol[free] = Fraction(1)
    for row, col in zip(rows, pivots):
        sol[col] = -row[free]
    total = sol[0] + sol[1]
    if total == 0:
        raise GuardError("stationary vector has zero mass on [0,1] and [1,2]")
    sol = [x / total for x in sol]
    if min(sol) < 0:
        raise GuardError("stationary vector has mixed signs")
    return tuple(sol)


@dataclass(frozen=True)
class NumerationSystem:
    """Quadratic Pisot numeration data for digits {0, ..., a} with law p.

    Indices of all 3x3 matrices follow the carry order (0, 1, beta - a).
    `cylinder_matrices[e]` generates the measure of the partition cylinder
    for letter e; `commutation_matrices` / `reduced_matrices` realize the
    exact 3x3 -> 2x2 reduction Y M = P Y over the doubled alphabet.
    """

    base: QuadraticBase
    p: tuple[Fraction, ...]
    alpha: BetaNumber
    carry_set: tuple[BetaNumber, ...]
    digit_matrices: tuple[Mat3, ...]  # index e in {0..a}
    partition_maps: tuple[AffineMap, ...]  # index e in {0..a+b-1}
    cylinder_matrices: tuple[Mat3, ...]  # index e in {0..a+b-1}
    commutation_matrices: tuple[Mat3, ...]  # index e in {0..2a}
    reduced_matrices: tuple[tuple[tuple[Fraction, ...], ...], ...]  # 2x2, {0..2a}
    lift_matrices: tuple[tuple[tuple[Fraction, ...], ...], ...]  # 3x2, {0..a+b-1}
    stationary: tuple[Fraction, Fraction, Fraction]

    @property
    def digit_count(self) -> int:
        return len(self.p)

    @property
    def alphabet_size(self) -> int:
        """Letters of the partition alphabet, a + b."""
        return len(self.partition_maps)

    def p_or_zero(self, i: int) -> Fraction:
        return _p_or_zero(self.p, i)


def _check_partition(base, maps) -> None:
    left = maps[0](base.zero)
    if left != base.zero:
        raise GuardError("partition does not start at 0")
    for e in range(len(maps) - 1):
        if maps[e](base.one) != maps[e + 1](base.zero):
            raise GuardError(f"partition endpoints mismatch between letters {e} and {e + 1}")
    if maps[-1](base.one) != base.one:
        raise GuardError("partition does not end at 1")
    for m in maps:
        if m.scale.sign() <= 0:
            raise GuardError("partition map is not increasing")


def build_system(a: int, b: int, p) -> NumerationSystem:
    """Construct and cross-check the full numeration system.

    `p` is a positive probability vector of length a + 1 (rational
    entries).  Construction fails loudly when any structural identity
    (carry set, digit-rule vs closed form, partition tiling, commutation,
    stationary fixed point) does not hold exactly.
    """
    base = QuadraticBase(a, b)
    p = tuple(as_fraction(x) for x in p)
    if len(p) != a + 1:
        raise DomainError(f"need {a + 1} digit probabilities, got {len(p)}")
    if min(p) <= 0:
        raise DomainError("digit probabilities must be strictly positive")
    if sum(p) != 1:
        raise DomainError("digit probabilities must sum to exactly 1")

    carries = reachable_set(base, a + 1)
    expected = {base.zero, base.one, base.beta - a}
    if set(carries) != expected:
        raise GuardError(f"carry set {carries} differs from {{0, 1, beta-a}}")
    carries = (base.zero, base.one, base.beta - a)

    digit_mats = []
    for eps in range(a + 1):
        rule = _digit_matrix_from_rule(base, p, carries, eps)
        closed = _digit_matrix_closed_form(p, a, b, eps)
        if rule != closed:
            raise GuardError(f"digit matrix {eps} disagrees with its closed form")
        digit_mats.append(rule)
    digit_mats = tuple(digit_mats)

    inv_beta = base.beta.inverse()
    one_step = [AffineMap(inv_beta, base.num(e) * inv_beta) for e in range(a + 1)]
    maps = [one_step[e] for e in range(a)]
    maps += [one_step[a].compose(one_step[e - a]) for e in range(a, a + b)]
    maps = tuple(maps)
    _check_partition(base, maps)

    cylinder = tuple(
        digit_mats[e] if e < a else mat3_mul(digit_mats[a], digit_mats[e - a])
        for e in range(a + b)
    )

    commutation = tuple(
        mat3_mul(digit_mats[0], digit_mats[e]) if e <= a else digit_mats[e - a]
        for e in range(2 * a + 1)
    )
    reduced = []
    for e in range(2 * a + 1):
        if e <= a:
            reduced.append(
                (
                    (p[0] * _p_or_zero(p, e), p[0] * _p_or_zero(p, e - 1)),
                    (p[a] * _p_or_zero(p, b + e), p[a] * _p_or_zero(p, b + e - 1)),
                )
            )
        else:
            reduced.append(
                ((_p_or_zero(p, e - a), _p_or_zero(p, e - a - 1)), (Fraction(0), Fraction(0)))
            )
    reduced = tuple(reduced)
    for e in range(2 * a + 1):
        lhs = commutation[e][0], commutation[e][1]  # Y M: first two rows
        rhs = (
            (reduced[e][0][0], reduced[e][0][1], Fraction(0)),
            (reduced[e][1][0], reduced[e][1][1], Fraction(0)),
        )
        if lhs != rhs:
            raise GuardError(f"commutation Y M = P Y fails at letter {e}")

    lifts = tuple(
        (
            (_p_or_zero(p, e), _p_or_zero(p, e - 1)),
            (Fraction(0), Fraction(0)),
            (_p_or_zero(p, b + e), _p_or_zero(p, b + e - 1)),
        )
        for e in range(a + b)
    )

    aggregate = cylinder[0]
    for m in cylinder[1:]:
        aggregate = tuple(
            tuple(aggregate[i][j] + m[i][j] for j in range(3)) for i in range(3)
        )
    stationary = _stationary_kernel(aggregate)
    if mat3_vec(aggregate, stationary) != stationary:
        raise GuardError("stationary vector is not an exact fixed point")

    alpha = base.num(a) * (base.beta - 1).inverse()
    return NumerationSystem(
        base=base,
        p=p,
        alpha=alpha,
        carry_set=carries,
        digit_matrices=digit_mats,
        partition_maps=maps,
        cylinder_matrices=cylinder,
        commutation_matrices=commutation,
        reduced_matrices=reduced,
        lift_matrices=lifts,
        stationary=stationary,
    )
