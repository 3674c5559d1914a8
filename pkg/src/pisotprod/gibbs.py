"""n-step potentials of the fractional-part measure and the weak-Gibbs
criterion for quadratic Pisot bases.

phi_n(xi) = log( mu*[xi_1..xi_n] / mu*[xi_2..xi_n] ) is computed from
exact rational cylinder masses; the single float conversion happens in
the final log of an exact ratio, so no cancellation accumulates.  The
criterion itself (p0^2 >= p_a p_{b-1} and p0 p_{a-b+1} >= p_a^2) is
decided in exact rational arithmetic, with the matching divergence
witness attached when it fails.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .betanum import Mat3, NumerationSystem, mat3_mul
from .classify import MatrixFamily
from .errors import DomainError, GuardError
from .matcore import Mat2, Vec2

__all__ = [
    "PotentialTrace",
    "GibbsVerdict",
    "ScanReport",
    "AsymptoticsReport",
    "potential_trace",
    "step_potential",
    "weak_gibbs_verdict",
    "potential_gap_scan",
    "divergence_witness_b",
    "m0_asymptotics",
    "reduced_product_family",
]


def _int_log(n: int) -> float:
    return math.log(n)


def _log_fraction(x: Fraction) -> float:
    return _int_log(x.numerator) - _int_log(x.denominator)


def _integerized(sys: NumerationSystem):
    """Cylinder generators as integer matrices plus per-letter log scale.

    Scale factors cancel in every phi ratio except the first letter's,
    which enters as a constant offset.
    """
    mats = []
    logs = []
    for m in sys.cylinder_matrices:
        den = 1
        for row in m:
            for x in row:
                den = den * x.denominator // math.gcd(den, x.denominator)
        mats.append(tuple(tuple(int(x * den) for x in row) for row in m))
        logs.append(_int_log(den))
    dv = 1
    for x in sys.stationary:
        dv = dv * x.denominator // math.gcd(dv, x.denominator)
    vint = tuple(int(x * dv) for x in sys.stationary)
    return mats, logs, vint


def _row_imat(r, m):
    return (
        r[0] * m[0][0] + r[1] * m[1][0] + r[2] * m[2][0],
        r[0] * m[0][1] + r[1] * m[1][1] + r[2] * m[2][1],
        r[0] * m[0][2] + r[1] * m[1][2] + r[2] * m[2][2],
    )


def _idot(r, v) -> int:
    return r[0] * v[0] + r[1] * v[1] + r[2] * v[2]


@dataclass
class PotentialTrace:
    """phi_1 .. phi_n along one word, with the successive gaps."""

    letters: tuple[int, ...]
    phis: list[float]

    @property
    def gaps(self) -> list[float]:
        return [abs(b - a) for a, b in zip(self.phis, self.phis[1:])]


def potential_trace(sys: NumerationSystem, letters) -> PotentialTrace:
    """Exact-ratio potentials along every prefix of `letters`."""
    w = tuple(letters)
    if not w:
        raise DomainError("need at least one letter")
    for x in w:
        if not 0 <= x < sys.alphabet_size:
            raise DomainError(f"letter {x} outside partition alphabet")
    mats, logs, vint = _integerized(sys)
    rf = (1, 1, 0)
    rs = (1, 1, 0)
    head_log = logs[w[0]]
    phis = []
    for k, x in enumerate(w, start=1):
        rf = _row_imat(rf, mats[x])
        if k >= 2:
            rs = _row_imat(rs, mats[x])
        num = _idot(rf, vint)
        den = _idot(rs, vint)
        if num <= 0 or den <= 0:
            raise GuardError("cylinder of zero measure encountered")
        phis.append(_int_log(num) - _int_log(den) - head_log)
    return PotentialTrace(letters=w, phis=phis)


def step_potential(sys: NumerationSystem, letters, n: int) -> float:
    """phi_n of the word: needs a prefix of length >= n."""
    w = tuple(letters)
    if n < 1 or len(w) < n:
        raise DomainError("prefix shorter than requested potential depth")
    return potential_trace(sys, w[:n]).phis[n - 1]


@dataclass
class GibbsVerdict:
    """Outcome of the two rational criterion inequalities.

    `witness` is "A" (linearly growing potential along the two-letter
    periodic word) when the first inequality fails, "B" (cylinder
    correlation ratio bounded away from 1) when only the second fails
    with b != 1.
    """

    weak_gibbs: bool
    ineq1: tuple[Fraction, Fraction]  # p0^2 vs p_a p_{b-1}
    ineq2: tuple[Fraction, Fraction]  # p0 p_{a-b+1} vs p_a^2
    witness: str | None


def weak_gibbs_verdict(sys: NumerationSystem) -> GibbsVerdict:
    a, b = sys.base.a, sys.base.b
    p = sys.p
    ineq1 = (p[0] ** 2, p[a] * p[b - 1])
    ineq2 = (p[0] * p[a - b + 1], p[a] ** 2)
    ok = ineq1[0] >= ineq1[1] and ineq2[0] >= ineq2[1]
    witness = None
    if not ok:
        if ineq1[0] < ineq1[1]:
            witness = "A"
        else:
            if b == 1:
                raise GuardError("with b = 1 the second inequality cannot fail alone")
            witness = "B"
    return GibbsVerdict(weak_gibbs=ok, ineq1=ineq1, ineq2=ineq2, witness=witness)


@dataclass
class ScanReport:
    """Empirical sup-gap profile of the potentials.

    `sup_gaps[n-1]` estimates sup over words of |phi_{n+1} - phi_n|;
    `k_bounds[n-1]` is exp(g_1 + ... + g_n) and `k_roots[n-1]` its n-th
    root, which drifts down toward 1 exactly when the potentials converge
    uniformly.
    """

    depth: int
    sup_gaps: list[float]
    k_bounds: list[float]
    k_roots: list[float]
    exhaustive: bool
    words_probed: int
    seed: int


def _structured_scan_words(sys: NumerationSystem, depth: int, seed: int, budget: int):
    s = sys.alphabet_size
    length = depth + 1
    words: list[tuple[int, ...]] = []
    for k in range(s):
        words.append((k,) * length)
    for i in range(s):
        for j in range(s):
            if i != j:
                words.append(((i, j) * length)[:length])
    # the cylinder decomposition prefixes e' 0^k e, padded two ways
    for ep in range(s):
        for e in range(1, s):
            for k in range(0, min(12, length - 2) + 1):
                head = (ep,) + (0,) * k + (e,)
                pad = length - len(head)
                words.append(head + (0,) * pad)
                words.append(head + (e,) * pad)
    rng = random.Random(seed)
    while len(words) < budget:
        words.append(tuple(rng.randrange(s) for _ in range(length)))
    seen = set()
    out = []
    for w in words[:budget]:
        if w not in seen:
            seen.add(w)
            out.append(w)
    return out


def potential_gap_scan(sys: NumerationSystem, depth: int, breadth: int = 40000, seed: int = 0) -> ScanReport:
    """Estimate g_n = sup |phi_{n+1} - phi_n| for n = 1..depth.

    Exhausts all words of length depth+1 when their count fits inside
    `breadth`; otherwise runs the structured battery (constant words,
    alternating pairs, the 0-run cylinder prefixes) topped up with random
    words.  Deterministic in `seed`.
    """
    if depth < 2:
        raise DomainError("depth must be >= 2")
    mats, logs, vint = _integerized(sys)
    s = sys.alphabet_size
    length = depth + 1
    sup_gaps = [0.0] * depth
    exhaustive = s**length <= breadth
    words_probed = 0

    if exhaustive:
        # depth-first over the word tree, sharing prefix products
        root = (1, 1, 0)
        stack = [(root, root, lab, logs[lab], None, 1) for lab in range(s)]
        while stack:
            rf, rs, lab, head_log, phi_prev, k = stack.pop()
            rf = _row_imat(rf, mats[lab])
            if k >= 2:
                rs = _row_imat(rs, mats[lab])
            phi = _int_log(_idot(rf, vint)) - _int_log(_idot(rs, vint)) - head_log
            if phi_prev is not None:
                gap = abs(phi - phi_prev)
                if gap > sup_gaps[k - 2]:
                    sup_gaps[k - 2] = gap
            if k == length:
                words_probed += 1
                continue
            for nxt in range(s):
                stack.append((rf, rs, nxt, head_log, phi, k + 1))
    else:
        for w in _structured_scan_words(sys, depth, seed, breadth):
            tr = potential_trace(sys, w)
            for n0, gap in enumerate(tr.gaps):
                if gap > sup_gaps[n0]:
                    sup_gaps[n0] = gap
            words_probed += 1

    k_bounds = []
    acc = 0.0
    for g in sup_gaps:
        acc += g
        k_bounds.append(math.exp(acc))
    k_roots = [kb ** (1.0 / (n + 1)) for n, kb in enumerate(k_bounds)]
    return ScanReport(
        depth=depth,
        sup_gaps=sup_gaps,
        k_bounds=k_bounds,
        k_roots=k_roots,
        exhaustive=exhaustive,
        words_probed=words_probed,
        seed=seed,
    )


def divergence_witness_b(sys: NumerationSystem, n: int) -> float:
    """n-th root of mu*[(0 q)^n 1^n] / (mu*[(0 q)^n] mu*[1^n]), q = a-b+1.

    Approaches p0 p_{a-b+1} / p_a^2 as n grows; only defined for b != 1.
    """
    if sys.base.b == 1:
        raise DomainError("the correlation witness requires b != 1")
    if n < 1:
        raise DomainError("n must be >= 1")
    q = sys.base.a - sys.base.b + 1
    mats, logs, vint = _integerized(sys)

    def log_mass(word):
        r = (1, 1, 0)
        scale = 0.0
        for x in word:
            r = _row_imat(r, mats[x])
            scale += logs[x]
        return _int_log(_idot(r, vint)) - scale - _int_log(vint[0] + vint[1])

    block = (0, q) * n
    ones = (1,) * n
    log_ratio = log_mass(block + ones) - log_mass(block) - log_mass(ones)
    return math.exp(log_ratio / n)


@dataclass
class AsymptoticsReport:
    """Scaled powers of the 0-digit matrix against their rank-1 limit.

    `off_pattern_max` is the largest entry in columns 2 and 3 at `k_max`;
    `off_pattern_half` the same at k_max/2 (their ratio exposes the decay
    rate: about 1/2 in the critical regime, tiny in the subcritical one).
    `column_direction_residual` measures the angle between the first
    column and the predicted limit direction.
    """

    mode: str
    k_max: int
    matrix: tuple[tuple[float, ...], ...]
    off_pattern_max: float
    off_pattern_half: float
    lambda0: float
    column_direction_residual: float
    lambda_eps: list[float]
    lambda1: float


def _scaled_power(sys: NumerationSystem, k: int, critical: bool) -> Mat3:
    m0 = sys.digit_matrices[0]
    acc = m0
    for _ in range(k - 1):
        acc = mat3_mul(acc, m0)
    scale = sys.p[0] ** k
    if critical:
        scale = scale * k
    return tuple(tuple(x / scale for x in row) for row in acc)


def m0_asymptotics(sys: NumerationSystem, k_max: int = 200) -> AsymptoticsReport:
    """Verify the rank-1 limit shape of the scaled 0-digit powers.

    Subcritical (p_a p_{b-1} < p0^2) scales by p0^-k; critical (equality)
    by an extra 1/k.  The supercritical regime diverges under both
    scalings and raises.
    """
    a, b = sys.base.a, sys.base.b
    p = sys.p
    lhs, rhs = p[a] * p[b - 1], p[0] ** 2
    if lhs > rhs:
        raise DomainError("supercritical digit law: scaled powers diverge")
    critical = lhs == rhs
    mode = "critical" if critical else "subcritical"
    ak = _scaled_power(sys, k_max, critical)
    ak_half = _scaled_power(sys, max(1, k_max // 2), critical)
    off = max(abs(float(ak[i][j])) for i in range(3) for j in (1, 2))
    off_half = max(abs(float(ak_half[i][j])) for i in range(3) for j in (1, 2))
    target = (rhs - lhs, p[a] * sys.p_or_zero(b), p[0] * sys.p_or_zero(b))
    col = tuple(ak[i][0] for i in range(3))
    norm_t = sum(target)
    norm_c = sum(col)
    if norm_c <= 0:
        raise GuardError("first column of the scaled power vanished")
    lambda0 = float(norm_c / norm_t) if norm_t > 0 else float("nan")
    resid = 0.0
    if norm_t > 0:
        resid = max(abs(float(col[i] / norm_c - target[i] / norm_t)) for i in range(3))
    # ratio diagnostics of the uniform-limit proof
    lam_eps = []
    q1 = sys.lift_matrices[1]
    row = (Fraction(1), Fraction(1), Fraction(0))
    akq = tuple(
        tuple(sum(ak[i][k] * q1[k][j] for k in range(3)) for j in range(2)) for i in range(3)
    )
    base_row = tuple(sum(row[i] * akq[i][j] for i in range(3)) for j in range(2))
    lambda1 = float(base_row[0] / p[1]) if p[1] > 0 else float("nan")
    for eps_mat in sys.cylinder_matrices:
        r = tuple(sum(row[i] * eps_mat[i][j] for i in range(3)) for j in range(3))
        vals = tuple(sum(r[i] * akq[i][j] for i in range(3)) for j in range(2))
        lam_eps.append(float(vals[0] / p[1]))
    return AsymptoticsReport(
        mode=mode,
        k_max=k_max,
        matrix=tuple(tuple(float(x) for x in row) for row in ak),
        off_pattern_max=off,
        off_pattern_half=off_half,
        lambda0=lambda0,
        column_direction_residual=resid,
        lambda_eps=lam_eps,
        lambda1=lambda1,
    )


def reduced_product_family(sys: NumerationSystem) -> MatrixFamily:
    """The 2x2 commutation-quotient family with the projected stationary V.

    This is the matrix family whose normalized products drive the
    potentials; feeding it to `classify`/`convergence_probe` connects the
    weak-Gibbs criterion to the five-case convergence test.
    """
    mats = tuple(
        Mat2(m[0][0], m[0][1], m[1][0], m[1][1]) for m in sys.reduced_matrices
    )
    v = Vec2(sys.stationary[0], sys.stationary[1])
    return MatrixFamily(mats, v)
