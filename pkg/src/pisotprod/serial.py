"""JSON wire formats and exact-scalar parsing shared with the CLI.

Scalars serialize as strings: integers plain, rationals "p/q".  On input
any of "p/q", a decimal string, an int, or a JSON float is accepted;
floats and decimal strings that are not integers mark the parse as
inexact (the decimal value is honored exactly, e.g. 0.1 -> 1/10).
Interval endpoints may reference the base through `beta`/`b` terms such
as "beta-1" or "1/2 + 3/2*beta".
"""

from __future__ import annotations

import json
import re
from decimal import Decimal
from fractions import Fraction
from importlib import resources

from .betanum import BetaNumber, QuadraticBase
from .classify import MatrixFamily
from .errors import DomainError
from .matcore import Mat2, Vec2

__all__ = [
    "parse_scalar",
    "fmt_scalar",
    "family_from_obj",
    "family_to_obj",
    "system_params_from_obj",
    "parse_beta_expr",
    "parse_interval",
    "round_floats",
    "dump_json",
    "corpus_path",
    "corpus_names",
    "load_corpus_family",
    "load_corpus_system_params",
]


class ParseState:
    """Tracks whether any non-exact literal was seen during parsing."""

    def __init__(self):
        self.inexact = False


def parse_scalar(x, state: ParseState | None = None) -> Fraction:
    if isinstance(x, bool):
        raise DomainError("boolean is not a scalar")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if state is not None and not float(x).is_integer():
            state.inexact = True
        return Fraction(Decimal(repr(x)))
    if isinstance(x, str):
        s = x.strip()
        try:
            fr = Fraction(Decimal(s)) if ("." in s or "e" in s.lower()) and "/" not in s else Fraction(s)
        except (ValueError, ZeroDivisionError, ArithmeticError) as exc:
            raise DomainError(f"cannot parse scalar {x!r}") from exc
        if state is not None and ("." in s or "e" in s.lower()):
            state.inexact = True
        return fr
    raise DomainError(f"cannot parse scalar {x!r}")


def fmt_scalar(x) -> str:
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    raise DomainError(f"cannot format {x!r} as an exact scalar")


def family_from_obj(obj, state: ParseState | None = None) -> MatrixFamily:
    """{"matrices": [[[a,b],[c,d]], ...], "V": [v1, v2]}"""
    try:
        raw_mats = obj["matrices"]
        raw_v = obj["V"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"family JSON missing field: {exc}") from exc
    mats = []
    for k, rows in enumerate(raw_mats):
        try:
            (a, b), (c, d) = rows
        except (TypeError, ValueError) as exc:
            raise DomainError(f"matrices[{k}] is not a 2x2 array") from exc
        mats.append(
            Mat2(
                parse_scalar(a, state),
                parse_scalar(b, state),
                parse_scalar(c, state),
                parse_scalar(d, state),
            )
        )
    if len(raw_v) != 2:
        raise DomainError("V must have two components")
    v = Vec2(parse_scalar(raw_v[0], state), parse_scalar(raw_v[1], state))
    return MatrixFamily(tuple(mats), v)


def family_to_obj(fam: MatrixFamily) -> dict:
    return {
        "matrices": [
            [[fmt_scalar(m.a), fmt_scalar(m.b)], [fmt_scalar(m.c), fmt_scalar(m.d)]]
            for m in fam.matrices
        ],
        "V": [fmt_scalar(fam.V.x1), fmt_scalar(fam.V.x2)],
    }


def system_params_from_obj(obj, state: ParseState | None = None) -> tuple[int, int, list[Fraction]]:
    """{"a": int, "b": int, "p": [scalars]}"""
    try:
        a = obj["a"]
        b = obj["b"]
        p = obj["p"]
    except (KeyError, TypeError) as exc:
        raise DomainError(f"system JSON missing field: {exc}") from exc
    if not isinstance(a, int) or not isinstance(b, int):
        raise DomainError("fields a and b must be integers")
    return a, b, [parse_scalar(x, state) for x in p]


_TERM = re.compile(
    r"""^(?:
        (?P<coef>[0-9][0-9/.]*)\s*\*?\s*(?P<sym1>beta|b)?
        |(?P<sym2>beta|b)(?:\s*/\s*(?P<div>[0-9][0-9/.]*))?
    )$""",
    re.VERBOSE,
)


def parse_beta_expr(text: str, base: QuadraticBase, state: ParseState | None = None) -> BetaNumber:
    """Parse expressions like "1", "2/3", "beta-1", "1/2+3/2*beta"."""
    s = text.replace("β", "b").strip()
    if not s:
        raise DomainError("empty interval endpoint")
    chunks = re.split(r"(?=[+-])", s.replace(" ", ""))
    total = base.zero
    for chunk in chunks:
        if not chunk:
            continue
        sign = 1
        body = chunk
        if body[0] in "+-":
            sign = -1 if body[0] == "-" else 1
            body = body[1:]
        m = _TERM.match(body)
        if not m:
            raise DomainError(f"cannot parse endpoint term {chunk!r} in {text!r}")
        if m.group("sym2") is not None:
            coef = Fraction(1)
            if m.group("div"):
                coef = 1 / parse_scalar(m.group("div"), state)
            total = total + base.num(0, sign * coef)
        else:
            coef = parse_scalar(m.group("coef"), state)
            if m.group("sym1"):
                total = total + base.num(0, sign * coef)
            else:
                total = total + base.num(sign * coef)
    return total


def parse_interval(text: str, base: QuadraticBase, state: ParseState | None = None) -> tuple[BetaNumber, BetaNumber]:
    s = text.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise DomainError(f"interval must look like \"[lo, hi]\", got {text!r}")
    parts = s[1:-1].split(",")
    if len(parts) != 2:
        raise DomainError(f"interval needs two endpoints: {text!r}")
    return (
        parse_beta_expr(parts[0], base, state),
        parse_beta_expr(parts[1], base, state),
    )


def round_floats(obj, digits: int = 12):
    """Canonicalize floats to `digits` significant digits, recursively."""
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj


def dump_json(obj) -> str:
    """Deterministic rendering: sorted keys, 12-significant-digit floats."""
    return json.dumps(round_floats(obj), indent=2, sort_keys=True) + "\n"


def corpus_names() -> list[str]:
    root = resources.files("pisotprod") / "corpus"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def corpus_path(name: str):
    """Traversable for a bundled corpus file (with or without .json)."""
    if not name.endswith(".json"):
        name += ".json"
    path = resources.files("pisotprod") / "corpus" / name
    if not path.is_file():
        raise DomainError(f"no corpus entry {name!r}; available: {corpus_names()}")
    return path


def load_corpus_family(name: str) -> MatrixFamily:
    with corpus_path(name).open() as fh:
        return family_from_obj(json.load(fh))


def load_corpus_system_params(name: str):
    with corpus_path(name).open() as fh:
        return system_params_from_obj(json.load(fh))
