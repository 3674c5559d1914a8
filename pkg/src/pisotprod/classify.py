"""Decision procedure for uniform convergence of normalized products.

Given a finite family {M_0, ..., M_{s-1}} of nonnegative column-allowable
2x2 matrices and a positive vector V, `classify` decides which of the
five sufficient-and-necessary case predicates hold, hence whether
N(P_n(w) V) converges uniformly over all infinite words w.

The triangular/corner clauses quantify over literal shapes: a matrix
contributes an inequality for every shape it matches (a diagonal matrix
is both upper- and lower-triangular, a matrix with a null second row
matches both the upper and the bottom-right-corner shapes).  Collapsing
each matrix to a single pattern class is not sound: {diag(3,1),
diag(1,3)} and null-row mixes come out convergent under that reading
while their products visibly oscillate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, GuardError
from .matcore import Mat2, Vec2

__all__ = [
    "ZeroPattern",
    "MatrixFamily",
    "Verdict",
    "zero_pattern",
    "classify",
    "build_delta",
    "epsilon_sequence",
]


class ZeroPattern(enum.Enum):
    """Exclusive coarse pattern of a matrix, used for reporting and
    stratified test generation (not by the case predicates)."""

    POSITIVE = "positive"
    DIAGONAL = "diagonal"
    ANTIDIAGONAL = "antidiagonal"
    NULL_ROW = "null_row"
    UPPER = "upper"
    LOWER = "lower"
    TOPLEFT_ZERO = "topleft_zero"
    BOTTOMRIGHT_ZERO = "bottomright_zero"


def zero_pattern(m: Mat2) -> ZeroPattern:
    """Classify by zero set; diagonal/antidiagonal/null-row take precedence."""
    if m.is_positive():
        return ZeroPattern.POSITIVE
    if m.b == 0 and m.c == 0:
        return ZeroPattern.DIAGONAL
    if m.a == 0 and m.d == 0:
        return ZeroPattern.ANTIDIAGONAL
    if m.has_null_row():
        return ZeroPattern.NULL_ROW
    if m.c == 0:
        return ZeroPattern.UPPER
    if m.b == 0:
        return ZeroPattern.LOWER
    if m.a == 0:
        return ZeroPattern.TOPLEFT_ZERO
    return ZeroPattern.BOTTOMRIGHT_ZERO


@dataclass(frozen=True)
class MatrixFamily:
    """Indexed matrices over the alphabet {0, ..., s-1} plus a positive V."""

    matrices: tuple[Mat2, ...]
    V: Vec2

    def __post_init__(self):
        object.__setattr__(self, "matrices", tuple(self.matrices))
        if not self.matrices:
            raise DomainError("family needs at least one matrix")
        if not self.V.is_positive():
            raise DomainError("V must have both components strictly positive")

    @property
    def size(self) -> int:
        return len(self.matrices)


@dataclass
class Verdict:
    """Satisfied case subset; converges iff it is nonempty."""

    cases: frozenset[int]
    converges: bool
    witnesses: dict[int, list[dict]] = field(default_factory=dict)


def _uppers(fam):
    # literal shape ((a b)(0 d)); includes diagonal and null-second-row
    return [(i, m) for i, m in enumerate(fam.matrices) if m.c == 0]


def _lowers(fam):
    return [(i, m) for i, m in enumerate(fam.matrices) if m.b == 0]


def _corner_pairs(fam):
    """Ordered pairs (index of ((a b)(c 0)), index of ((0 b')(c' d')))."""
    left = [(i, m) for i, m in enumerate(fam.matrices) if m.d == 0]
    right = [(j, m) for j, m in enumerate(fam.matrices) if m.a == 0]
    return [(i, mi, j, mj) for i, mi in left for j, mj in right]


def _check_case(fam: MatrixFamily, case: int) -> list[dict]:
    """Failed clauses of one case predicate (empty list means satisfied)."""
    fails: list[dict] = []
    if case in (1, 3):
        for i, m in _uppers(fam):
            if not m.a >= m.d:
                fails.append({"clause": "upper a >= d", "index": i})
    if case in (2, 4):
        for i, m in _uppers(fam):
            if not m.a < m.d:
                fails.append({"clause": "upper a < d", "index": i})
    if case == 1:
        for i, m in _lowers(fam):
            if not m.a <= m.d:
                fails.append({"clause": "lower a <= d", "index": i})
    if case == 4:
        for i, m in _lowers(fam):
            if not m.a <= m.d:
                fails.append({"clause": "lower a <= d", "index": i})
    if case in (2, 3):
        for i, m in _lowers(fam):
            if not m.a > m.d:
                fails.append({"clause": "lower a > d", "index": i})
    if case == 1:
        for i, mi, j, mj in _corner_pairs(fam):
            if not mi.b * mj.c >= mj.b * mi.c:
                fails.append({"clause": "pair b c' >= b' c", "indices": [i, j]})
        for i, m in enumerate(fam.matrices):
            if m.b == 0 and m.c == 0:
                fails.append({"clause": "no diagonal matrix", "index": i})
            if m.a == 0 and m.d == 0:
                fails.append({"clause": "no antidiagonal matrix", "index": i})
    if case == 2:
        for i, mi, j, mj in _corner_pairs(fam):
            if not mi.b * mj.c < mj.b * mi.c:
                fails.append({"clause": "pair b c' < b' c", "indices": [i, j]})
    if case == 3:
        for i, m in enumerate(fam.matrices):
            if m.a == 0:
                fails.append({"clause": "no matrix ((0 b)(c d))", "index": i})
    if case == 4:
        for i, m in enumerate(fam.matrices):
            if m.d == 0:
                fails.append({"clause": "no matrix ((a b)(c 0))", "index": i})
    if case == 5:
        v = fam.V
        for i, m in enumerate(fam.matrices):
            img = m.mul_vec(v)
            if img.x1 * v.x2 != img.x2 * v.x1:
                fails.append({"clause": "V eigenvector (cross product zero)", "index": i})
    return fails


def classify(fam: MatrixFamily) -> Verdict:
    """Evaluate all five case predicates; converges iff one holds.

    Every predicate is evaluated even after the first success so the full
    satisfied subset is reported; the case-5 test is exact (cross product
    of MV with V over the rationals).
    """
    cases = set()
    witnesses: dict[int, list[dict]] = {}
    for case in (1, 2, 3, 4, 5):
        fails = _check_case(fam, case)
        if fails:
            witnesses[case] = fails
        else:
            cases.add(case)
    return Verdict(cases=frozenset(cases), converges=bool(cases), witnesses=witnesses)


def _feasible_alpha(fam: MatrixFamily, case: int) -> Fraction:
    """Pivot ratio for the corner-swap matrix ((0 alpha)(1 0)).

    Case 1 needs  b/c >= alpha >= b'/c'  over all matrices of shape
    ((a b)(c 0)) (with c > 0) and ((0 b')(c' d')); case 2 reverses both
    inequalities.  Midpoint of the feasible interval, with conventional
    values on unbounded sides.
    """
    corner_ratios = []  # b/c over matrices ((a b)(c 0)) with c > 0
    hole_ratios = []  # b'/c' over matrices ((0 b')(c' d'))
    for m in fam.matrices:
        if m.d == 0 and m.c > 0:
            corner_ratios.append(m.b / m.c)
        if m.a == 0:
            hole_ratios.append(m.b / m.c)
    if case == 1:
        hi = min(corner_ratios) if corner_ratios else None
        lo = max(hole_ratios) if hole_ratios else None
    else:
        hi = min(hole_ratios) if hole_ratios else None
        lo = max(corner_ratios) if corner_ratios else None
    if lo is None and hi is None:
        return Fraction(1)
    if hi is None:
        return lo + 1 if lo > 0 else Fraction(1)
    if hi <= 0 or (lo is not None and lo > hi):
        _raise_infeasible(case)
    if lo is None or lo == 0:
        return hi / 2
    return (lo + hi) / 2


def _raise_infeasible(case: int):
    raise GuardError(f"no feasible pivot ratio under case {case} conditions")


def build_delta(fam: MatrixFamily, case: int | None = None) -> tuple[Mat2, MatrixFamily]:
    """Corner-swap matrix Delta = ((0 alpha)(1 0)) and the derived family.

    The derived family is {Delta^-1 M, M Delta : det M < 0} united with
    {M, Delta^-1 M Delta : det M >= 0}; it satisfies the same case
    conditions as the input, which is asserted.  `case` may force mode 1
    or 2; by default the first of the two that holds is used.
    """
    verdict = classify(fam)
    if case is None:
        if 1 in verdict.cases:
            case = 1
        elif 2 in verdict.cases:
            case = 2
        else:
            raise DomainError("family satisfies neither case 1 nor case 2")
    elif case not in (1, 2):
        raise DomainError("case must be 1 or 2")
    elif case not in verdict.cases:
        raise DomainError(f"family does not satisfy case {case}")
    alpha = _feasible_alpha(fam, case)
    if alpha <= 0:
        _raise_infeasible(case)
    delta = Mat2(0, alpha, 1, 0)
    dinv = Mat2(0, 1, Fraction(1, 1) / alpha, 0)
    derived: list[Mat2] = []
    for m in fam.matrices:
        if m.det() < 0:
            derived.append(dinv @ m)
            derived.append(m @ delta)
        else:
            derived.append(m)
            derived.append(dinv @ m @ delta)
    derived_fam = MatrixFamily(tuple(derived), fam.V)
    for m in derived_fam.matrices:
        if m.det() < 0:
            raise GuardError("derived family contains a negative-determinant matrix")
    if _check_case(derived_fam, case):
        raise GuardError(f"derived family violates case {case} conditions")
    return delta, derived_fam


def epsilon_sequence(fam: MatrixFamily, word_prefix) -> list[int]:
    """Side-flip sequence driven by the determinant signs along a word.

    eps_0 = 0; eps_n repeats eps_{n-1} when det M_{w_n} > 0 and flips when
    it is negative.  A zero determinant is an error naming the position.
    """
    eps = [0]
    for pos, letter in enumerate(word_prefix, start=1):
        m = fam.matrices[letter]
        det = m.det()
        if det == 0:
            raise DomainError(f"singular matrix at position {pos} (letter {letter})")
        eps.append(eps[-1] if det > 0 else 1 - eps[-1])
    return eps
