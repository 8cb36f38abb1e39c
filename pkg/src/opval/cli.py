"""Command line front end.

Exit codes: 0 success or certificate, 1 violation or mismatch, 2 usage,
input or budget error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from typing import Sequence

from . import __version__
from ._rational import CRational
from .algebra import AlgElem, Automorphism, TraceFunctional
from .circular import alternating_moment, check_circular_trace, semicircular_covariance
from .cumulants import (IncompleteFamily, OrderOverflow, check_trace_condition,
                        cumulants_from_moments, cumulants_to_moments)
from .modelio import (SchemaError, family_to_json, linear_map_to_json, load_json,
                      parse_family, resolve_model)
from .ncpart import NC_MAX, enumerate_nc
from .rdiag import (BudgetExceeded, check_polar_obstruction, check_rdiag_cumulants,
                    check_rdiag_words, check_theta_twist, m2_freeness_check)
from .series import solve_FG

__all__ = ["main", "run", "build_parser"]

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.add_argument("--out", help="write the main artifact to this path")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $OPVAL_THREADS or 1)")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="opval", description="Operator-valued free probability over B = C^d.")
    parser.add_argument("--version", action="version", version=f"opval {__version__}")
    top = parser.add_subparsers(dest="group", parser_class=_Parser)
    top.required = True

    nc = top.add_parser("nc", help="noncrossing partitions").add_subparsers(dest="cmd", parser_class=_Parser)
    nc.required = True
    p = nc.add_parser("enumerate", help="list NC(n) in canonical order")
    p.add_argument("--n", type=int, required=True)
    _common(p)

    cu = top.add_parser("cumulants", help="moment/cumulant families").add_subparsers(dest="cmd", parser_class=_Parser)
    cu.required = True
    p = cu.add_parser("convert", help="convert a family file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--to", choices=("moments", "cumulants"), required=True)
    p.add_argument("--max-order", type=int, default=None)
    _common(p)
    p = cu.add_parser("trace", help="trace condition on a family")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--tau", required=True, help="comma separated rational weights")
    p.add_argument("--max-len", type=int, default=6)
    _common(p)

    rd = top.add_parser("rdiag", help="R-diagonality").add_subparsers(dest="cmd", parser_class=_Parser)
    rd.required = True
    p = rd.add_parser("check", help="certify or refute R-diagonality")
    p.add_argument("--model", required=True)
    p.add_argument("--max-len", type=int, default=6)
    p.add_argument("--mode", choices=("all", "cumulant", "word", "m2"), default="all")
    p.add_argument("--degree", type=int, default=2, help="z-degree bound for the m2 test")
    p.add_argument("--budget", type=int, default=2_000_000)
    p.add_argument("--max-order", type=int, default=None)
    _common(p)
    p = rd.add_parser("polar", help="free polar decomposition obstruction")
    p.add_argument("--model", required=True)
    _common(p)
    p = rd.add_parser("twist", help="theta-twisted symmetry of the alternating cumulants")
    p.add_argument("--model", required=True)
    p.add_argument("--theta", default="flip", help="flip, identity, or a comma separated permutation")
    p.add_argument("--k", type=int, default=3)
    _common(p)

    ci = top.add_parser("circular", help="circular elements").add_subparsers(dest="cmd", parser_class=_Parser)
    ci.required = True
    p = ci.add_parser("moments", help="alternating moments at b = 1")
    p.add_argument("--model", required=True)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--pattern", choices=("start_a", "start_astar"), default="start_a")
    _common(p)
    p = ci.add_parser("covariance", help="real/imaginary part covariances and complete positivity")
    p.add_argument("--model", required=True)
    _common(p)
    p = ci.add_parser("trace", help="traciality of a circular model")
    p.add_argument("--model", required=True)
    p.add_argument("--tau", default=None, help="comma separated rational weights (default uniform)")
    _common(p)

    se = top.add_parser("series", help="F, G series").add_subparsers(dest="cmd", parser_class=_Parser)
    se.required = True
    p = se.add_parser("fg", help="coefficients of F(b1, b2) and G(b1, b2)")
    p.add_argument("--model", required=True)
    p.add_argument("--order", type=int, default=12)
    p.add_argument("--b1", default=None, help="comma separated rationals (default unit)")
    p.add_argument("--b2", default=None)
    p.add_argument("--trace", action="store_true", help="report tau(F_n), tau(G_n)")
    p.add_argument("--tau", default=None, help="trace weights (default uniform)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _common(p)

    sp = top.add_parser("spectral", help="spectral analysis of the C (+) C example").add_subparsers(
        dest="cmd", parser_class=_Parser)
    sp.required = True
    p = sp.add_parser("verify-appendix", help="exact h series, quartic, G curve and discriminant")
    p.add_argument("--order", type=int, default=30)
    _common(p)
    p = sp.add_parser("density", help="density of a*a by Stieltjes inversion")
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--eps", type=float, default=1e-7)
    p.add_argument("--no-richardson", action="store_true")
    p.add_argument("--svg", default=None)
    p.add_argument("--abs", action="store_true", help="plot the density of |a| in the SVG")
    p.add_argument("--overlay", action="store_true", help="add the quarter-circular curve to the SVG")
    _common(p)
    p = sp.add_parser("norm", help="operator norm and discriminant roots")
    _common(p)
    p = sp.add_parser("puiseux", help="compare the branch with the small-w expansions")
    _common(p)
    return parser


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _threads(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.threads
    env = os.environ.get("OPVAL_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"OPVAL_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return 1


def _rationals(text: str, d: int | None = None) -> list[CRational]:
    try:
        vals = [CRational(Fraction(x.strip())) for x in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"expected comma separated rationals, got {text!r}") from None
    if d is not None and len(vals) != d:
        raise UsageError(f"expected {d} values, got {len(vals)}")
    return vals


def _elem(text: str | None, d: int) -> AlgElem:
    return AlgElem.unit(d) if text is None else AlgElem(_rationals(text, d))


def _tau(text: str | None, d: int) -> TraceFunctional:
    if text is None:
        return TraceFunctional.uniform(d)
    try:
        return TraceFunctional(_rationals(text, d))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _strs(b) -> list[str]:
    return [str(x) for x in b]


def _emit(args, report: dict, text_lines: Sequence[str], timings: dict | None = None) -> None:
    if timings and args.timings:
        report["timings"] = {k: round(v, 6) for k, v in timings.items()}
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=False))
    else:
        for line in text_lines:
            print(line)


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _nc_enumerate(args) -> int:
    if not 1 <= args.n <= NC_MAX:
        raise UsageError(f"--n must be in 1..{NC_MAX}, got {args.n}")
    parts = [p.to_lists() for p in enumerate_nc(args.n)]
    if args.out:
        _write(args.out, json.dumps(parts) + "\n")
    if args.json:
        print(json.dumps(parts))
    else:
        for p in parts:
            print(" ".join("{" + ",".join(map(str, b)) + "}" for b in p))
    return EXIT_OK


def _cumulants_convert(args) -> int:
    fam = parse_family(load_json(args.infile))
    N = args.max_order or fam.max_order
    t0 = time.perf_counter()
    if args.to == fam.kind:
        out = fam
    elif args.to == "moments":
        out = cumulants_to_moments(fam, N)
    else:
        out = cumulants_from_moments(fam, N)
    doc = family_to_json(out)
    text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        _write(args.out, text)
    report = {"command": "cumulants convert", "parameters": {"to": args.to, "max_order": N},
              "words": len(doc["maps"])}
    if args.out:
        _emit(args, report, [f"wrote {len(doc['maps'])} nonzero {args.to} maps to {args.out}"],
              {"convert": time.perf_counter() - t0})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cumulants_trace(args) -> int:
    fam = parse_family(load_json(args.infile))
    tau = _tau(args.tau, fam.dimension)
    if fam.kind == "moments":
        fam = cumulants_from_moments(fam, min(args.max_len, fam.max_order))
    v = check_trace_condition(fam, tau, args.max_len)
    report = {"command": "cumulants trace", "parameters": {"max_len": args.max_len, "tau": _strs(tau.weights)},
              "verdicts": {"trace_condition": v.ok}, "counterexamples": [v.witness] if v.witness else []}
    _emit(args, report, [f"trace condition (L={args.max_len}): {'holds' if v.ok else 'fails'}"]
          + ([f"witness: {json.dumps(v.witness)}"] if v.witness else []))
    return EXIT_OK if v.ok else EXIT_VIOLATION


def _rdiag_check(args) -> int:
    model = resolve_model(args.model)
    L = args.max_len
    if L < 1:
        raise UsageError("--max-len must be >= 1")
    N = args.max_order or max(L, 2)
    verdicts, witnesses, timings = {}, [], {}
    modes = ("cumulant", "word", "m2") if args.mode == "all" else (args.mode,)
    need_moments = any(m in ("word", "m2") for m in modes)
    cumfam = model.cumulant_family(N)
    momfam = model.moment_family(N) if need_moments else None
    for mode in modes:
        t0 = time.perf_counter()
        if mode == "cumulant":
            v = check_rdiag_cumulants(cumfam, L // 2 if L >= 2 else 1)
        elif mode == "word":
            v = check_rdiag_words(momfam, L)
        else:
            v = m2_freeness_check(momfam, max(1, L // args.degree), args.degree, args.budget)
        timings[mode] = time.perf_counter() - t0
        verdicts[mode] = v.ok
        if v.witness:
            witnesses.append({"mode": mode, **v.witness})
    ok = all(verdicts.values())
    report = {"command": "rdiag check",
              "parameters": {"model": args.model, "max_len": L, "mode": args.mode, "degree": args.degree},
              "verdicts": verdicts, "certified": ok, "counterexamples": witnesses}
    lines = [f"{m}: {'pass' if v else 'FAIL'}" for m, v in verdicts.items()]
    lines += [f"witness: {json.dumps(w)}" for w in witnesses]
    lines.append("certified R-diagonal up to the given length" if ok else "violation found")
    if args.out:
        _write(args.out, json.dumps(report, indent=2) + "\n")
    _emit(args, report, lines, timings)
    return EXIT_OK if ok else EXIT_VIOLATION


def _rdiag_polar(args) -> int:
    model = resolve_model(args.model)
    rep = check_polar_obstruction(model.moment_family(2))
    report = {"command": "rdiag polar", "parameters": {"model": args.model}, **rep.to_dict()}
    _emit(args, report, [f"status: {rep.status}", f"E(a*a) = {_strs(rep.E_astar_a)}",
                         f"E(aa*) = {_strs(rep.E_a_astar)}"])
    return EXIT_OK


def _parse_theta(text: str, d: int) -> Automorphism:
    if text == "flip":
        return Automorphism.flip(d)
    if text == "identity":
        return Automorphism.identity(d)
    try:
        perm = [int(x) for x in text.split(",")]
        if sorted(perm) != list(range(d)):
            raise ValueError
    except ValueError:
        raise UsageError(f"--theta must be flip, identity or a permutation of 0..{d - 1}") from None
    return Automorphism(perm)


def _rdiag_twist(args) -> int:
    model = resolve_model(args.model)
    rmodel = model.rdiag_model(args.k)
    theta = _parse_theta(args.theta, model.dimension)
    v = check_theta_twist(rmodel, theta, args.k)
    report = {"command": "rdiag twist", "parameters": {"model": args.model, "theta": list(theta.perm), "k": args.k},
              "verdicts": {"theta_twist": v.ok}, "counterexamples": [v.witness] if v.witness else []}
    _emit(args, report, [f"theta twist: {'holds' if v.ok else 'fails'}"]
          + ([f"witness: {json.dumps(v.witness)}"] if v.witness else []))
    return EXIT_OK if v.ok else EXIT_VIOLATION


def _circular_model(args):
    model = resolve_model(args.model)
    if model.circular is None:
        raise UsageError("this command needs a circular model")
    return model.circular


def _circular_moments(args) -> int:
    cm = _circular_model(args)
    if args.order < 0:
        raise UsageError("--order must be >= 0")
    u = AlgElem.unit(cm.dimension)
    vals = [_strs(alternating_moment(cm, args.pattern, [u] * (2 * n))) for n in range(args.order + 1)]
    report = {"command": "circular moments", "parameters": {"model": args.model, "order": args.order,
                                                            "pattern": args.pattern}, "moments": vals}
    _emit(args, report, [f"m_{n} = ({', '.join(v)})" for n, v in enumerate(vals)])
    if args.out:
        _write(args.out, json.dumps(report, indent=2) + "\n")
    return EXIT_OK


def _circular_covariance(args) -> int:
    cm = _circular_model(args)
    sc = semicircular_covariance(cm)
    report = {"command": "circular covariance", "parameters": {"model": args.model},
              "gamma11": linear_map_to_json(sc.g11), "gamma12": linear_map_to_json(sc.g12),
              "gamma21": linear_map_to_json(sc.g21), "gamma22": linear_map_to_json(sc.g22),
              "completely_positive": sc.completely_positive, "witness": sc.witness}
    _emit(args, report, [f"completely positive: {sc.completely_positive}"]
          + ([f"witness: {json.dumps(sc.witness)}"] if sc.witness else []))
    return EXIT_OK if sc.completely_positive else EXIT_VIOLATION


def _circular_trace(args) -> int:
    cm = _circular_model(args)
    tau = _tau(args.tau, cm.dimension)
    v = check_circular_trace(cm, tau)
    report = {"command": "circular trace", "parameters": {"model": args.model, "tau": _strs(tau.weights)},
              "verdicts": {"trace": v.ok}, "counterexamples": [v.witness] if v.witness else []}
    _emit(args, report, [f"tau(eta1(b1) b2) = tau(b1 eta2(b2)): {'holds' if v.ok else 'fails'}"])
    return EXIT_OK if v.ok else EXIT_VIOLATION


def _series_fg(args) -> int:
    cm = _circular_model(args)
    if args.order < 0:
        raise UsageError("--order must be >= 0")
    d = cm.dimension
    b1, b2 = _elem(args.b1, d), _elem(args.b2, d)
    F, G = solve_FG(cm, b1, b2, args.order)
    if args.trace:
        tau = _tau(args.tau, d)
        fs, gs = [str(x) for x in F.traced(tau)], [str(x) for x in G.traced(tau)]
    else:
        fs, gs = [_strs(c) for c in F], [_strs(c) for c in G]
    if args.format == "csv":
        rows = ["n,F,G"]
        for n, (f, g) in enumerate(zip(fs, gs)):
            fcell = f if args.trace else " ".join(f)
            gcell = g if args.trace else " ".join(g)
            rows.append(f"{n},{fcell},{gcell}")
        text = "\n".join(rows) + "\n"
    else:
        text = json.dumps({"command": "series fg",
                           "parameters": {"model": args.model, "order": args.order, "trace": args.trace},
                           "F": fs, "G": gs}, indent=2) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _spectral_verify(args) -> int:
    from .spectral import appendix_component_series, discriminant_roots, h_to_G_curve, verify_h_quartic

    N = args.order
    if N < 0:
        raise UsageError("--order must be >= 0")
    t0 = time.perf_counter()
    hs = appendix_component_series(N).h
    quartic = verify_h_quartic(N, hs)
    curve = h_to_G_curve()
    disc = discriminant_roots()
    ok = quartic and disc.matches
    report = {"command": "spectral verify-appendix", "parameters": {"order": N},
              "h": [str(x) for x in hs], "quartic_identity": quartic,
              "G_curve": {f"G^{i} w^{j}": str(c) for (i, j), c in sorted(curve.terms.items(), reverse=True)},
              "discriminant": disc.to_dict()}
    lines = ["h coefficients: " + ", ".join(str(x) for x in hs),
             f"quartic identity {'holds' if quartic else 'FAILS'} to order {N}",
             "G curve: " + " + ".join(f"({c}) G^{i} w^{j}" for (i, j), c in sorted(curve.terms.items(), reverse=True)),
             f"discriminant matches -64 w^4 (16w^4-160w^3+540w^2-680w+27) up to scalar: {disc.matches}"
             + (f" (scalar {disc.scalar})" if disc.matches else ""),
             "real discriminant roots: " + ", ".join(f"{r:.7g}" for r in disc.real_roots)]
    _emit(args, report, lines, {"total": time.perf_counter() - t0})
    return EXIT_OK if ok else EXIT_VIOLATION


def _spectral_density(args) -> int:
    from .spectral import default_grid, density, integrate_moments, write_csv, write_svg

    if args.points < 2:
        raise UsageError("--points must be >= 2")
    if not 0 < args.eps <= 1e-3:
        raise UsageError("--eps must be in (0, 1e-3]")
    t0 = time.perf_counter()
    samples = density(default_grid(args.points), args.eps, richardson=not args.no_richardson,
                      threads=_threads(args))
    mom = integrate_moments(samples)
    out = args.out or "density.csv"
    write_csv(samples, out)
    if args.svg:
        write_svg(samples, args.svg, abs_version=args.abs, overlay=args.overlay)
    report = {"command": "spectral density",
              "parameters": {"points": args.points, "eps": args.eps, "richardson": not args.no_richardson},
              "csv": out, "svg": args.svg, "mass": mom[0], "moments": {str(k): mom[k] for k in (1, 2, 3)}}
    lines = [f"wrote {args.points} samples to {out} (eps={args.eps:g}"
             + (", Richardson)" if not args.no_richardson else ")"),
             f"mass {mom[0]:.6f}; moments 1..3: {mom[1]:.6f}, {mom[2]:.6f}, {mom[3]:.6f}"]
    _emit(args, report, lines, {"total": time.perf_counter() - t0})
    return EXIT_OK


def _spectral_norm(args) -> int:
    from .spectral import NORM_POLYNOMIAL, discriminant_roots, operator_norm

    disc = discriminant_roots()
    x = operator_norm()
    res = abs(NORM_POLYNOMIAL(x))
    report = {"command": "spectral norm", "norm": x, "norm_squared": x * x,
              "norm_polynomial_residual": res, "discriminant_real_roots": list(disc.real_roots)}
    _emit(args, report, [f"||a|| = {x:.10g}", f"||a||^2 = {x * x:.10g}",
                         f"residual of 16x^8-160x^6+540x^4-680x^2+27: {res:.3g}",
                         "real discriminant roots: " + ", ".join(f"{r:.7g}" for r in disc.real_roots)])
    return EXIT_OK


def _spectral_puiseux(args) -> int:
    from .spectral import check_puiseux

    ws = [-10.0 ** -k for k in range(2, 9)]
    rep = check_puiseux(ws)
    report = {"command": "spectral puiseux", **rep.to_dict()}
    lines = [f"w={w:.0e}  G={g:.8g}  |G-G2|/|w|^(1/3)={r2:.4g}  |G-G1|/|G1|={r1:.4g}"
             for w, g, r2, r1 in zip(rep.w, rep.G, rep.g2_ratio, rep.g1_ratio)]
    lines.append(f"fitted exponent of |G-G2|: {rep.g2_exponent:.4f}")
    _emit(args, report, lines)
    return EXIT_OK


_DISPATCH = {
    ("nc", "enumerate"): _nc_enumerate,
    ("cumulants", "convert"): _cumulants_convert,
    ("cumulants", "trace"): _cumulants_trace,
    ("rdiag", "check"): _rdiag_check,
    ("rdiag", "polar"): _rdiag_polar,
    ("rdiag", "twist"): _rdiag_twist,
    ("circular", "moments"): _circular_moments,
    ("circular", "covariance"): _circular_covariance,
    ("circular", "trace"): _circular_trace,
    ("series", "fg"): _series_fg,
    ("spectral", "verify-appendix"): _spectral_verify,
    ("spectral", "density"): _spectral_density,
    ("spectral", "norm"): _spectral_norm,
    ("spectral", "puiseux"): _spectral_puiseux,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv`` and run the command; returns the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        return _DISPATCH[(args.group, args.cmd)](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
    except (OrderOverflow, IncompleteFamily) as exc:
        print(f"order error: {exc}", file=sys.stderr)
    except SystemExit as exc:       # --help / --version
        return int(exc.code or 0)
    return EXIT_USAGE


def main(argv: Sequence[str] | None = None) -> int:
    code = run(argv)
    sys.exit(code)
