"""Command-line driver: one subcommand per experiment, JSON or CSV output.

Exit codes: 0 ok, 2 input error, 3 numeric failure, 4 budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import mpmath

from . import boundary, green, mcg, periodic, surface, toruscover
from .errors import (
    BudgetExceeded,
    DegenerateMatrix,
    EigenvalueMismatch,
    MarkovDynError,
    NotAdapted,
    NotFixed,
    NotLoxodromic,
    NotRational,
    PrecisionExhausted,
    SingularPoint,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_BUDGET = 0, 2, 3, 4

INPUT_ERRORS = (ValueError, NotLoxodromic, NotRational, DegenerateMatrix, NotFixed)
NUMERIC_ERRORS = (PrecisionExhausted, SingularPoint, EigenvalueMismatch, NotAdapted, ZeroDivisionError)


class InputError(Exception):
    pass


def parse_scalar(text: str):
    """Exact rational when possible, otherwise a complex big float."""
    t = text.strip()
    try:
        return Fraction(t)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return mpmath.mpmathify(t.replace("i", "j")) if "j" in t or "i" in t else mpmath.mpf(t)
    except (ValueError, TypeError):
        pass
    try:
        return mpmath.mpc(complex(t.replace("i", "j")))
    except ValueError:
        raise InputError(f"cannot parse number {text!r}")


def parse_point(text: str | None, D=None) -> surface.SurfacePoint:
    if text is None:
        raise InputError("--point is required")
    parts = [s for s in text.replace(";", ",").split(",") if s.strip()]
    if len(parts) != 3:
        raise InputError("--point needs three comma-separated coordinates")
    vals = [parse_scalar(s) for s in parts]
    if all(isinstance(v, Fraction) for v in vals) and (D is None or isinstance(D, Fraction)):
        return surface.SurfacePoint.rational(*vals, D)
    return surface.SurfacePoint.mp(*vals, D=D, prec=green.BASE_PRECISION)


def parse_matrix(text: str) -> mcg.Matrix2:
    parts = [s for s in text.replace(";", ",").replace(" ", ",").split(",") if s]
    if len(parts) != 4:
        raise InputError("--matrix needs four integers a,b,c,d")
    try:
        return mcg.Matrix2(*(int(s) for s in parts))
    except ValueError:
        raise InputError(f"bad matrix {text!r}")


def parse_word(text: str | None, what: str = "--word") -> mcg.AutomorphismWord:
    if text is None:
        raise InputError(f"{what} is required")
    if any(ch not in "xyz" for ch in text.strip()) and text.strip().lower() not in ("", "id", "1", "e"):
        raise InputError(f"{what} must use the letters x, y, z")
    return mcg.AutomorphismWord.parse(text)


def map_arg(args, second: bool = False):
    """A word, or a monomial matrix given with --matrix (only for the first map)."""
    if not second and getattr(args, "matrix", None):
        return parse_matrix(args.matrix)
    return parse_word(args.word2 if second else args.word, "--word2" if second else "--word")


def param_D(args, default=None):
    if args.D is None:
        return default
    return parse_scalar(args.D)


def _json_default(o):
    if isinstance(o, Fraction):
        return f"{o.numerator}/{o.denominator}"
    if isinstance(o, (mpmath.mpf, mpmath.mpc, complex)):
        return surface.scalar_to_json(o)
    return str(o)


def emit(args, payload, rows=None, header=None):
    """Write JSON (payload) or CSV (header + rows) to --out or stdout."""
    if args.format == "csv":
        if rows is None:
            raise InputError(f"{args.command} has no CSV form")
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(header)
        wr.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> dict:
    keys = ("command", "word", "word2", "matrix", "D", "point", "place", "tol", "nmax", "seed", "budget")
    return {k: getattr(args, k, None) for k in keys if getattr(args, k, None) is not None}


# subcommands


def cmd_degree(args):
    w = map_arg(args)
    dd = mcg.dynamical_degree(w)
    kind = mcg.classify(w)
    out = {
        "config": _config(args),
        "word": str(w),
        "matrix": surface.matrix_of(w).rows(),
        "classification": kind,
        "is_identity": surface.matrix_of(w).eq_pgl(mcg.Matrix2.identity()),
        "lambda1": dd.datum() if kind == "loxodromic" else "1",
        "lambda1_exact": str(dd.lambda1),
        "lambda1_float": dd.value,
        "entropy": dd.entropy,
    }
    if kind == "loxodromic":
        bp = mcg.boundary_fixed_points(w)
        out["alpha"], out["omega"] = str(bp.alpha), str(bp.omega)
        out["alpha_float"], out["omega_float"] = float(bp.alpha), float(bp.omega)
    rows = [[k, out[k]] for k in ("word", "classification", "lambda1", "lambda1_float", "entropy")]
    emit(args, out, rows, ["key", "value"])


def cmd_classify(args):
    w = map_arg(args)
    kind = mcg.classify(w)
    emit(args, {"config": _config(args), "word": str(w), "classification": kind}, [[str(w), kind]],
         ["word", "classification"])


def cmd_orbit(args):
    w = map_arg(args)
    D = param_D(args)
    p = parse_point(args.point, D)
    if not surface.on_surface(p):
        raise InputError("point is not on the surface for this D")
    traj = surface.orbit(w, p, args.nmax)
    rows = [[i] + [surface.scalar_to_json(c) for c in q.coords()] for i, q in enumerate(traj.points)]
    out = {
        "config": _config(args),
        "points": [q.to_json() for q in traj.points],
        "escaped": traj.escaped,
        "escape_index": traj.escape_index,
    }
    emit(args, out, rows, ["n", "x", "y", "z"])


def cmd_green(args):
    w = map_arg(args)
    D = param_D(args)
    p = parse_point(args.point, D)
    if not surface.on_surface(p):
        raise InputError("point is not on the surface for this D")
    v = green.Place.parse(args.place)
    gp = green.green_plus(w, p, v, args.tol, args.nmax)
    gm = green.green_minus(w, p, v, args.tol, args.nmax)
    out = {"config": _config(args), "place": str(v), "green_plus": gp.to_json(), "green_minus": gm.to_json()}
    rows = [["plus", gp.value, gp.n_used, gp.cauchy_gap, gp.certified_positive],
            ["minus", gm.value, gm.n_used, gm.cauchy_gap, gm.certified_positive]]
    emit(args, out, rows, ["sign", "value", "n_used", "cauchy_gap", "certified_positive"])


def cmd_height(args):
    w = map_arg(args)
    D = param_D(args)
    p = parse_point(args.point, D)
    if not surface.on_surface(p):
        raise InputError("point is not on the surface for this D")
    h = green.height(w, p, args.tol, args.nmax)
    per = {str(v): val for v, val in h.per_place.items()}
    out = {"config": _config(args), "height": h.value, "per_place": per,
           "places": [str(v) for v in h.places_enumerated]}
    rows = [[k, val] for k, val in per.items()] + [["total", h.value]]
    emit(args, out, rows, ["place", "value"])


def _periodic_rows(pts):
    rows = []
    for p in pts:
        j = p.to_json()
        rows.append([p.period, p.minimal_period, p.label, p.certified_by]
                    + [f"{c[0]}{'+' if not c[1].startswith('-') else ''}{c[1]}j" for c in j["center"]]
                    + [p.width()])
    return rows


PERIODIC_HEADER = ["period", "minimal_period", "label", "certified_by", "x", "y", "z", "box_width"]


def cmd_periodic(args):
    w = map_arg(args)
    D = param_D(args, Fraction(4))
    pts = periodic.find_periodic(w, D, args.nmax, tol=args.tol, include_singular=args.include_singular,
                                 seed=args.seed)
    out = {"config": _config(args), "generator": f"numpy.default_rng({args.seed})",
           "points": [p.to_json() for p in pts], "count": len(pts)}
    emit(args, out, _periodic_rows(pts), PERIODIC_HEADER)


def cmd_compare(args):
    f, g = map_arg(args), map_arg(args, second=True)
    D = param_D(args, Fraction(4))
    rep = periodic.compare_periodic_sets(f, g, D, args.nmax, args.tol, seed=args.seed)
    out = {"config": _config(args), "generator": f"numpy.default_rng({args.seed})"}
    out.update(rep.to_json())
    rows = ([["common"] + r for r in _periodic_rows([a for a, _ in rep.common])]
            + [["only_f"] + r for r in _periodic_rows(rep.only_f)]
            + [["only_g"] + r for r in _periodic_rows(rep.only_g)])
    emit(args, out, rows, ["set"] + PERIODIC_HEADER)


def _monomial(args) -> mcg.Matrix2:
    if args.matrix:
        return parse_matrix(args.matrix)
    return surface.matrix_of(parse_word(args.word))


def cmd_torus(args):
    m = _monomial(args)
    ps = toruscover.periodic_points_exact(m, args.nmax)
    pts = [[str(e) for e in t.exponents] for t in ps.points]
    out = {"config": _config(args), "matrix": m.rows(), "n": args.nmax, "count": ps.count,
           "surface_count": ps.quotient_count, "smith": list(ps.smith), "points": pts}
    emit(args, out, [[a, b] for a, b in pts], ["s", "t"])


def cmd_equidist(args):
    m = _monomial(args)
    chars = toruscover.box_characters(args.kmax)
    rep = toruscover.equidistribution_test(m, args.nmax, chars)
    rows = [[k[0], k[1], rep.averages[k]] for k in chars]
    out = {"config": _config(args), "matrix": m.rows(), "n": args.nmax, "count": rep.count,
           "fraction_trivial": str(rep.fraction_trivial),
           "averages": [{"k": list(k), "average": rep.averages[k]} for k in chars]}
    emit(args, out, rows, ["k1", "k2", "average"])


def cmd_divisor(args):
    w = map_arg(args)
    if mcg.classify(w) != "loxodromic":
        # no eigen-divisors; report the pullback on the base completion
        X = boundary.base_completion()
        P = boundary.pullback_matrix(w, X)
        out = {"config": _config(args), "classification": mcg.classify(w), "completion": X.to_json(),
               "pullback": P.to_json()}
        emit(args, out, [list(r) for r in P.entries], [str(v) for v in X.vertices])
        return
    budget = 64 if args.budget is None else args.budget
    rep = boundary.divisor_report(w, budget)
    out = {"config": _config(args)}
    out.update(rep.to_json())
    P = rep.pullback
    emit(args, out, [list(r) for r in P.entries], [str(v) for v in rep.adapted.completion.vertices])


def cmd_escape(args):
    f, g = map_arg(args), map_arg(args, second=True)
    D = param_D(args, Fraction(0))
    budget = 100 if args.budget is None else args.budget
    res = periodic.unbounded_orbit_experiment(f, g, D, budget, seed=args.seed)
    out = {"config": _config(args), "generator": f"numpy.default_rng({args.seed})",
           "verdicts": [r.to_json() for r in res]}
    rows = [[i, json.dumps(r.point), str(r)] for i, r in enumerate(res)]
    emit(args, out, rows, ["index", "point", "verdict"])


COMMANDS = {
    "degree": cmd_degree,
    "classify": cmd_classify,
    "orbit": cmd_orbit,
    "green": cmd_green,
    "height": cmd_height,
    "periodic": cmd_periodic,
    "compare-per": cmd_compare,
    "torus": cmd_torus,
    "equidist": cmd_equidist,
    "divisor": cmd_divisor,
    "escape-experiment": cmd_escape,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="markovdyn", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--word")
        sp.add_argument("--word2")
        sp.add_argument("--matrix", help="monomial matrix a,b,c,d instead of a word")
        sp.add_argument("--D")
        sp.add_argument("--point", help="x,y,z (rationals or complex like 1+2j)")
        sp.add_argument("--place", default="inf", help="'inf' or a prime")
        sp.add_argument("--tol", type=float, default=1e-6 if name in ("green", "height") else 1e-10)
        sp.add_argument("--nmax", type=int, default={"orbit": 20, "green": 60, "height": 60,
                                                    "compare-per": 1, "torus": 1, "equidist": 1,
                                                    "periodic": 1}.get(name, 1))
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--budget", type=int)
        sp.add_argument("--kmax", type=int, default=10, help="character box |k_i| <= kmax")
        sp.add_argument("--include-singular", action="store_true")
        sp.add_argument("--out")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        COMMANDS[args.command](args)
    except BudgetExceeded as e:
        print(f"BudgetExceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, *INPUT_ERRORS) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (*NUMERIC_ERRORS, MarkovDynError) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
