"""Command-line front end.

Subcommands: classify, probe, numeration, measure, potential, gibbs.
Inputs are JSON files (family or system); a bare corpus name such as
`golden_uniform` resolves to the bundled corpus.  All runs are
reproducible byte for byte for a fixed configuration: outputs use sorted
keys and 12-significant-digit floats, and every stochastic routine is
seeded (default seed 0).  Exit codes: 0 success, 2 precondition or parse
error, 3 internal consistency failure.

The environment variable PISOTPROD_DPS overrides the working precision
(decimal digits) used for irrational quantities.
"""

from __future__ import annotations

import argparse
import json
import math
import sys as _sys
from fractions import Fraction
from pathlib import Path

from . import gibbs as gibbs_mod
from . import measure as measure_mod
from . import prodsim, serial
from .classify import classify
from .betanum import build_system
from .errors import DomainError, GuardError


def _load_json(path_str: str):
    path = Path(path_str)
    if path.exists():
        with path.open() as fh:
            return json.load(fh)
    try:
        with serial.corpus_path(path_str).open() as fh:
            return json.load(fh)
    except DomainError:
        raise DomainError(f"no such file or corpus entry: {path_str}")


def _load_family(path_str: str, state: serial.ParseState):
    return serial.family_from_obj(_load_json(path_str), state)


def _load_system(path_str: str, state: serial.ParseState):
    a, b, p = serial.system_params_from_obj(_load_json(path_str), state)
    return build_system(a, b, p)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        _sys.stdout.write(text)


def _emit_json(obj, out: str | None, inexact: bool):
    if inexact:
        obj = dict(obj)
        obj["inexact_input"] = True
    _emit(serial.dump_json(obj), out)


def _parse_word(text: str) -> list[int]:
    s = text.strip()
    if "," in s:
        return [int(x) for x in s.split(",") if x.strip() != ""]
    return [int(ch) for ch in s]


def _scalar_out(x) -> str | float:
    if isinstance(x, Fraction):
        return serial.fmt_scalar(x)
    return float(x)


def _cmd_classify(args) -> int:
    state = serial.ParseState()
    fam = _load_family(args.family, state)
    verdict = classify(fam)
    obj = {
        "cases": sorted(verdict.cases),
        "converges": verdict.converges,
        "witnesses": {str(k): v for k, v in verdict.witnesses.items()},
    }
    _emit_json(obj, args.out, state.inexact)
    return 0


def _cmd_probe(args) -> int:
    state = serial.ParseState()
    fam = _load_family(args.family, state)
    rep = prodsim.convergence_probe(fam, depth=args.depth, samples=args.samples, seed=args.seed)
    obj = {
        "depth": rep.depth,
        "window": list(rep.window),
        "sup_gap": rep.sup_gap,
        "argmax_word": rep.argmax_word,
        "converged_at_1e-3": rep.converged(),
        "decay_curve": rep.decay_curve,
        "envelope": {
            "lower": float(rep.envelope.lower),
            "upper": float(rep.envelope.upper),
            "exhaustive": rep.envelope.exhaustive,
            "depth": rep.envelope.depth,
        },
        "words_probed": rep.words_probed,
        "seed": rep.seed,
    }
    _emit_json(obj, args.out, state.inexact)
    return 0


def _mat_out(m) -> list:
    return [[_scalar_out(x) for x in row] for row in m]


def _cmd_numeration(args) -> int:
    state = serial.ParseState()
    system = _load_system(args.system, state)
    obj = {
        "a": system.base.a,
        "b": system.base.b,
        "p": [serial.fmt_scalar(x) for x in system.p],
        "beta": system.base.beta_float(),
        "alpha": float(system.alpha),
        "carry_set": [{"u": serial.fmt_scalar(x.u), "v": serial.fmt_scalar(x.v)} for x in system.carry_set],
        "stationary": [serial.fmt_scalar(x) for x in system.stationary],
    }
    if args.dump:
        obj["digit_matrices"] = [_mat_out(m) for m in system.digit_matrices]
        obj["cylinder_matrices"] = [_mat_out(m) for m in system.cylinder_matrices]
        obj["commutation_matrices"] = [_mat_out(m) for m in system.commutation_matrices]
        obj["reduced_matrices"] = [_mat_out(m) for m in system.reduced_matrices]
        obj["lift_matrices"] = [_mat_out(m) for m in system.lift_matrices]
        obj["partition_endpoints"] = [
            float(m(system.base.zero)) for m in system.partition_maps
        ] + [1.0]
    _emit_json(obj, args.out, state.inexact)
    return 0


def _cmd_measure(args) -> int:
    state = serial.ParseState()
    system = _load_system(args.system, state)
    lo, hi = serial.parse_interval(args.interval, system.base, state)
    if args.method == "exact":
        if args.star:
            est = measure_mod.star_interval(system, lo, hi)
        else:
            est = measure_mod.full_measure(system, lo, hi)
    else:
        if args.samples < 1:
            raise DomainError("--samples must be >= 1 for the Monte Carlo method")
        est = measure_mod.monte_carlo(
            system, lo, hi, args.samples, seed=args.seed, fractional=args.star, jobs=args.jobs
        )
    obj = {
        "interval": [float(lo), float(hi)],
        "measure": "mu*" if args.star else "mu_p",
        "value": float(est.value),
        "stderr": est.stderr,
        "method": est.method,
        "seed": args.seed if args.method == "mc" else None,
    }
    _emit_json(obj, args.out, state.inexact)
    return 0


def _cmd_potential(args) -> int:
    state = serial.ParseState()
    system = _load_system(args.system, state)
    letters = _parse_word(args.word)
    trace = gibbs_mod.potential_trace(system, letters)
    if args.n is not None:
        if not 1 <= args.n <= len(letters):
            raise DomainError("--n must lie within the word length")
        obj = {"n": args.n, "phi": trace.phis[args.n - 1]}
    else:
        obj = {"phis": trace.phis, "gaps": trace.gaps}
    _emit_json(obj, args.out, state.inexact)
    return 0


def _cmd_gibbs(args) -> int:
    state = serial.ParseState()
    system = _load_system(args.system, state)
    if args.verdict:
        v = gibbs_mod.weak_gibbs_verdict(system)
        obj = {
            "weak_gibbs": v.weak_gibbs,
            "ineq1": [float(v.ineq1[0]), float(v.ineq1[1])],
            "ineq2": [float(v.ineq2[0]), float(v.ineq2[1])],
            "witness": v.witness,
        }
        _emit_json(obj, args.out, state.inexact)
        return 0
    if args.scan:
        rep = gibbs_mod.potential_gap_scan(system, depth=args.depth, breadth=args.breadth, seed=args.seed)
        if args.csv:
            lines = ["n,sup_gap,K_n,K_n^{1/n}"]
            for i in range(rep.depth):
                lines.append(
                    f"{i + 1},{rep.sup_gaps[i]:.12g},{rep.k_bounds[i]:.12g},{rep.k_roots[i]:.12g}"
                )
            _emit("\n".join(lines) + "\n", args.csv)
            return 0
        obj = {
            "depth": rep.depth,
            "sup_gaps": rep.sup_gaps,
            "k_bounds": rep.k_bounds,
            "k_roots": rep.k_roots,
            "exhaustive": rep.exhaustive,
            "words_probed": rep.words_probed,
            "seed": rep.seed,
        }
        _emit_json(obj, args.out, state.inexact)
        return 0
    if args.witness == "a":
        n = args.n
        word = ([1, 0] * (n + 1))[: 2 * n + 1]
        phi = gibbs_mod.step_potential(system, word, 2 * n + 1)
        a, b = system.base.a, system.base.b
        predicted = math.log(float(system.p[a] * system.p[b - 1] / system.p[0] ** 2))
        obj = {"witness": "a", "n": n, "slope": phi / n, "predicted_slope": predicted}
    else:
        ratio = gibbs_mod.divergence_witness_b(system, args.n)
        a, b = system.base.a, system.base.b
        predicted = float(system.p[0] * system.p[a - b + 1] / system.p[a] ** 2)
        obj = {"witness": "b", "n": args.n, "nth_root_ratio": ratio, "predicted_limit": predicted}
    _emit_json(obj, args.out, state.inexact)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pisotprod",
        description="Normalized 2x2 matrix products, Bernoulli convolutions and weak-Gibbs checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("classify", help="five-case convergence verdict for a matrix family")
    pc.add_argument("--family", required=True, help="family JSON path or corpus name")
    pc.add_argument("--out", default=None)
    pc.set_defaults(func=_cmd_classify)

    pp = sub.add_parser("probe", help="empirical uniform-convergence probe")
    pp.add_argument("--family", required=True)
    pp.add_argument("--depth", type=int, default=60)
    pp.add_argument("--samples", type=int, default=200)
    pp.add_argument("--seed", type=int, default=0)
    pp.add_argument("--out", default=None)
    pp.set_defaults(func=_cmd_probe)

    pn = sub.add_parser("numeration", help="build and dump a numeration system")
    pn.add_argument("--system", required=True, help="system JSON path or corpus name")
    pn.add_argument("--dump", action="store_true", help="include all constructed matrices")
    pn.add_argument("--out", default=None)
    pn.set_defaults(func=_cmd_numeration)

    pm = sub.add_parser("measure", help="interval mass of mu_p (or mu* with --star)")
    pm.add_argument("--system", required=True)
    pm.add_argument("--interval", required=True, help='e.g. "[0, 1]" or "[beta-1, 1]"')
    pm.add_argument("--method", choices=("exact", "mc"), default="exact")
    pm.add_argument("--samples", type=int, default=10**6)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--star", action="store_true", help="fractional-part measure mu*")
    pm.add_argument("--jobs", type=int, default=1, help="worker cap for Monte Carlo strata")
    pm.add_argument("--out", default=None)
    pm.set_defaults(func=_cmd_measure)

    pt = sub.add_parser("potential", help="n-step potentials along a word")
    pt.add_argument("--system", required=True)
    pt.add_argument("--word", required=True, help='letters, e.g. "0101" or "0,1,0,1"')
    pt.add_argument("--n", type=int, default=None)
    pt.add_argument("--out", default=None)
    pt.set_defaults(func=_cmd_potential)

    pg = sub.add_parser("gibbs", help="weak-Gibbs verdict, gap scan, divergence witnesses")
    pg.add_argument("--system", required=True)
    mode = pg.add_mutually_exclusive_group(required=True)
    mode.add_argument("--verdict", action="store_true")
    mode.add_argument("--scan", action="store_true")
    mode.add_argument("--witness", choices=("a", "b"))
    pg.add_argument("--depth", type=int, default=14)
    pg.add_argument("--breadth", type=int, default=40000)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--n", type=int, default=60)
    pg.add_argument("--csv", default=None, help="write the scan as CSV to this path")
    pg.add_argument("--out", default=None)
    pg.set_defaults(func=_cmd_gibbs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2
    except GuardError as exc:
        print(f"internal check failed: {exc}", file=_sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
