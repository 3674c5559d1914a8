"""Matrix-product trajectories, envelope bounds and convergence probes.

Exact products use Fraction arithmetic; trajectory simulation runs in
double precision with per-step renormalization by the largest entry
(the accumulated log-scale is tracked separately, so overflow never
occurs even over millions of steps).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .classify import MatrixFamily
from .errors import DomainError
from .matcore import Mat2, Vec2, first_coordinate

__all__ = [
    "Word",
    "Trajectory",
    "MVBounds",
    "ProbeReport",
    "product_prefix",
    "trajectory",
    "mv_bounds",
    "convergence_probe",
]

#: exhaustive enumeration budget (nodes of the word tree)
EXHAUSTIVE_CAP = 2_000_000


@dataclass(frozen=True)
class Word:
    """Finite word, or eventually periodic word prefix + repeating block."""

    prefix: tuple[int, ...]
    period: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "period", tuple(self.period))

    def letters(self, n: int) -> list[int]:
        """First n letters; requires a period when n exceeds the prefix."""
        if n <= len(self.prefix):
            return list(self.prefix[:n])
        if not self.period:
            raise DomainError(f"word of length {len(self.prefix)} cannot yield {n} letters")
        out = list(self.prefix)
        k = len(self.period)
        while len(out) < n:
            out.append(self.period[(len(out) - len(self.prefix)) % k])
        return out

    def describe(self) -> str:
        head = "".join(map(str, self.prefix))
        if self.period:
            return f"{head}({''.join(map(str, self.period))})*"
        return head


def _validate_letters(fam: MatrixFamily, letters) -> list[int]:
    out = list(letters)
    for x in out:
        if not 0 <= x < fam.size:
            raise DomainError(f"letter {x} outside alphabet of size {fam.size}")
    return out


def product_prefix(fam: MatrixFamily, letters) -> Mat2:
    """Exact left-to-right product M_{w_1} ... M_{w_n}; empty word gives I."""
    acc = Mat2.identity()
    for x in _validate_letters(fam, letters):
        acc = acc @ fam.matrices[x]
    return acc


@dataclass
class Trajectory:
    """Per-step records along one word.

    `n_values[k]` is n(P_{k+1} V); `diag_values[k]` is
    d_columns(P_{k+1} M_V) when an envelope matrix was supplied;
    `log_scale[k]` is log of the largest entry of P_{k+1}.
    """

    word: Word
    n_values: list[float]
    diag_values: list[float] | None
    log_scale: list[float]


def _float_rows(m: Mat2):
    a, b, c, d = m.as_floats()
    return a, b, c, d


def _dcol_float(a, b, c, d) -> float:
    s1, s2 = a + c, b + d
    if s1 == 0.0 or s2 == 0.0:
        return 0.0
    return abs(a * d - b * c) / (s1 * s2)


def trajectory(fam: MatrixFamily, word: Word, depth: int, envelope: Mat2 | None = None) -> Trajectory:
    """Simulate n(P_n V) (and optionally d_columns(P_n M_V)) to `depth`."""
    letters = _validate_letters(fam, word.letters(depth))
    mats = [_float_rows(m) for m in fam.matrices]
    pa, pb, pc, pd = 1.0, 0.0, 0.0, 1.0
    v1, v2 = float(fam.V.x1), float(fam.V.x2)
    env = _float_rows(envelope) if envelope is not None else None
    n_values: list[float] = []
    diag_values: list[float] | None = [] if env is not None else None
    log_scale: list[float] = []
    scale = 0.0
    for x in letters:
        ma, mb, mc, md = mats[x]
        pa, pb, pc, pd = (
            pa * ma + pb * mc,
            pa * mb + pb * md,
            pc * ma + pd * mc,
            pc * mb + pd * md,
        )
        top = max(pa, pb, pc, pd)
        if top <= 0.0:
            raise DomainError("product collapsed to zero (not column-allowable?)")
        pa, pb, pc, pd = pa / top, pb / top, pc / top, pd / top
        scale += math.log(top)
        w1 = pa * v1 + pb * v2
        w2 = pc * v1 + pd * v2
        n_values.append(w1 / (w1 + w2))
        if env is not None:
            ea, eb, ec, ed = env
            qa = pa * ea + pb * ec
            qb = pa * eb + pb * ed
            qc = pc * ea + pd * ec
            qd = pc * eb + pd * ed
            diag_values.append(_dcol_float(qa, qb, qc, qd))
        log_scale.append(scale)
    return Trajectory(word=word, n_values=n_values, diag_values=diag_values, log_scale=log_scale)


@dataclass
class MVBounds:
    """Envelope of n(P_n V) over explored words of length <= depth."""

    lower: Fraction
    upper: Fraction
    matrix: Mat2
    exhaustive: bool
    depth: int


def mv_bounds(fam: MatrixFamily, depth: int, cap: int = EXHAUSTIVE_CAP, samples: int = 4096, seed: int = 0) -> MVBounds:
    """Min/max first normalized coordinate over the word tree.

    Exhaustive DFS when the tree has at most `cap` nodes, otherwise
    `samples` random words of full length (reported via `exhaustive`).
    The envelope matrix is ((m M)(1-m 1-M)); every visited value is
    checked to lie inside [m, M] as it is collected.
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    s = fam.size
    v1, v2 = float(fam.V.x1), float(fam.V.x2)
    n0 = v1 / (v1 + v2)
    lo = hi = n0
    mats = [_float_rows(m) for m in fam.matrices]
    nodes = 0
    tree = s
    for _ in range(1, depth):
        tree = tree * s + s
        if tree > cap:
            break
    exhaustive = tree <= cap

    def visit(w1, w2):
        nonlocal lo, hi
        n = w1 / (w1 + w2)
        if n < lo:
            lo = n
        elif n > hi:
            hi = n

    if exhaustive:
        stack = [(v1, v2, 0)]
        while stack:
            w1, w2, level = stack.pop()
            if level == depth:
                continue
            for ma, mb, mc, md in mats:
                u1 = ma * w1 + mb * w2
                u2 = mc * w1 + md * w2
                top = max(u1, u2)
                u1, u2 = u1 / top, u2 / top
                visit(u1, u2)
                stack.append((u1, u2, level + 1))
            nodes += s
    else:
        rng = random.Random(seed)
        for _ in range(samples):
            w1, w2 = v1, v2
            for _ in range(depth):
                ma, mb, mc, md = mats[rng.randrange(s)]
                u1 = ma * w1 + mb * w2
                u2 = mc * w1 + md * w2
                top = max(u1, u2)
                w1, w2 = u1 / top, u2 / top
                visit(w1, w2)
    m = Fraction(lo)
    mm = Fraction(hi)
    matrix = Mat2(m, mm, 1 - m, 1 - mm)
    return MVBounds(lower=m, upper=mm, matrix=matrix, exhaustive=exhaustive, depth=depth)


@dataclass
class ProbeReport:
    """Empirical uniform-Cauchy gap over a word battery.

    `sup_gap` is the largest oscillation of n(P_n V) inside the tail
    window over all probed words; `decay_curve[k]` is the largest
    d_columns(P_{k+1} M_V) over the battery.
    """

    depth: int
    window: tuple[int, int]
    sup_gap: float
    argmax_word: str
    decay_curve: list[float]
    envelope: MVBounds
    words_probed: int
    seed: int

    def converged(self, tol: float = 1e-3) -> bool:
        return self.sup_gap < tol


def _probe_words(fam: MatrixFamily, depth: int, samples: int, seed: int) -> list[Word]:
    s = fam.size
    words: list[Word] = []
    # eventually constant words and one-letter perturbations of them
    for k in range(s):
        words.append(Word((), (k,)))
        for e in range(s):
            if e != k:
                words.append(Word((e,), (k,)))
    # block and alternating words for every ordered pair
    switches = sorted({depth // 2, (2 * depth) // 3, max(1, depth - 10)})
    block = max(1, depth // 6)
    for i in range(s):
        for j in range(s):
            if i == j:
                continue
            for n_sw in switches:
                words.append(Word((i,) * n_sw, (j,)))
            words.append(Word((), (i, j)))
            if block > 1:
                words.append(Word((), (i,) * block + (j,) * block))
    # uniform random words
    rng = random.Random(seed)
    for _ in range(samples):
        words.append(Word(tuple(rng.randrange(s) for _ in range(depth))))
    return words


def convergence_probe(fam: MatrixFamily, depth: int, samples: int = 200, seed: int = 0) -> ProbeReport:
    """Estimate the sup over words of the tail oscillation of n(P_n V).

    The battery always contains the structured block/alternating words
    (these expose the discontinuity of the limit map when no case
    predicate holds) plus `samples` random words.  The oscillation of a
    word is max - min of n(P_n V) for n in [depth//2, depth].  Reports
    are deterministic for a given seed.
    """
    if depth < 2:
        raise DomainError("depth must be >= 2")
    env = mv_bounds(fam, depth=min(depth, 14), seed=seed)
    words = _probe_words(fam, depth, samples, seed)
    w_lo = depth // 2
    sup_gap = 0.0
    argmax = words[0]
    decay = [0.0] * depth
    for w in words:
        tr = trajectory(fam, w, depth, envelope=env.matrix)
        seg = tr.n_values[w_lo - 1 : depth]
        gap = max(seg) - min(seg)
        if gap > sup_gap:
            sup_gap = gap
            argmax = w
        for k, val in enumerate(tr.diag_values):
            if val > decay[k]:
                decay[k] = val
    return ProbeReport(
        depth=depth,
        window=(w_lo, depth),
        sup_gap=sup_gap,
        argmax_word=argmax.describe(),
        decay_curve=decay,
        envelope=env,
        words_probed=len(words),
        seed=seed,
    )
