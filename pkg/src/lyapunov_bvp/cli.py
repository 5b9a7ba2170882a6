"""Command-line interface: ``lyapunov-bvp <subcommand> ...``.

Exit codes: 0 when the computation finished (a ``NotCertified`` verdict is
a result, not an error), 2 for malformed input or arguments, 3 for
numerical failures (non-convergence, near-singular solves, integration
overflow). Error messages go to stderr only.

Every JSON report has the envelope::

    {"schema": "lyapunov-bvp/1", "version": "...", "command": "...",
     "config": {...effective options...}, "result": {...}}

and is written atomically (temporary file, then rename). Reports go to
``--out`` when given, otherwise to stdout. CSV files start with a
``# schema=lyapunov-bvp/1`` line.

Problem files
-------------
Scalar coefficient (period ``T``; ``"pi"``, ``"2pi"`` and ``"inf"`` are
accepted wherever a number is)::

    {"kind": "constant", "value": 5, "T": "pi"}
    {"kind": "fourier", "a0": 1, "cos": [0.5, 0], "sin": [0, 0.1], "T": 6.2832}
    {"kind": "piecewise", "breakpoints": [0, 1, 2], "values": [3, -1], "T": 2}
    {"kind": "samples", "values": [1, 2, 3, 2], "T": 1}

``a(t) = a0 + sum_k cos[k-1] cos(2 pi k t/T) + sin[k-1] sin(2 pi k t/T)``;
piecewise values hold on ``[b_i, b_{i+1})``; samples sit at ``t_i = i T/m``
with periodic linear interpolation.

Matrix coefficient: ``{"kind": "matrix", "T": ..., "entries": [[c11, c12],
[c21, c22]]}`` where each entry is a scalar coefficient or a number.

Domain: ``{"kind": "interval", "length": L}``, ``{"kind": "rectangle",
"a": A, "b": B}`` or ``{"kind": "disc", "radius": R}``; on the command
line also ``interval:L``, ``rectangle:AxB`` or ``disc:R``.

Field on a grid (``domain`` plus spacing ``h``): a number, a list of node
values, a constant ``n x n`` matrix, ``{"kind": "values", "values": [...]}``,
``{"kind": "cosine", "offset": c, "amplitude": m, "wavenumbers": [kx, ky],
"radial": false}`` (``c + m cos(kx x) cos(ky y)``, or ``c + m cos(k r)``
when radial) or ``{"kind": "matrix", "entries": [[field, ...], ...]}``.
Fields can also be read from CSV (``pde detect --input field.csv``): one
header line ``# schema=... domain=<json> h=<h> rows=<nodes> cols=<k>``
followed by one row per node with the coordinates and the value(s).

Certificate inputs (``certify <kind> --input FILE``):

* ``classical``, ``periodic-zone``, ``antiperiodic-zone``, ``hill``,
  ``disfocality``: a scalar coefficient, or ``{"coefficient": ...}`` with
  optional ``n`` / ``p_max`` / ``t0``; command-line flags override.
* ``krein``: ``{"P": matrix, "B": matrix, "p": [p1, ...]}``.
* ``coupling``: ``{"P": 2x2 matrix, "p": [p1, p2]}``.
* ``elliptic``: ``{"domain": ..., "h": ..., "A": matrix field,
  "B": diagonal field or omitted, "p": [p1, p2], "betas": optional}``.
  Without ``B`` a 2x2 majorant ``diag(a11 + g, a22 + a12^2/g)`` is chosen.

Resonant input (``resonant --input FILE``)::

    {"domain": ..., "h": ..., "nonlinearity": {
        "kind": "linear" | "saturated" | "custom",
        "b": [field, ...], "s0": [...], "coupling": [[...]],
        "forcing": [field, ...], "p": [...],
        "table": {"u": [...], "gu": [...], "guu": [...]} or {"csv": "u,gu,guu\\n..."}}}

Here a field is a number, a periodic coefficient (intervals only) or a
``cosine`` description. ``saturated`` means
``G_u = b ((u - s0) + tanh(u - s0)) / 2 + C u + f``, ``linear`` means
``G_u = b u + C u + f`` and ``custom`` interpolates the table (``C`` is the
optional constant coupling matrix, ``f`` the forcing).

Sweep charts colour cells grey (failed), blue (stable), orange (boundary)
and red (unstable); the CSV sibling lists ``alpha, beta, class, detail``.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import NumericalError
from .io import (SCHEMA_VERSION, InputError, csv_text, dumps_json, load_json, parse_coefficient,
                 parse_domain_checked, parse_field, parse_float, parse_matrix, parse_nonlinearity,
                 read_field_csv, atomic_write, write_csv)

__all__ = ["main", "run", "build_parser"]

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

RESCALING_HINT = ("a coefficient a of period T has the same stability as "
                  "b(s) = (T/pi)^2 a(T s/pi), which has period pi")


# -- argument helpers ---------------------------------------------------------------


def _num(x):
    try:
        return parse_float(x)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _range(text):
    """``start:stop:count`` -> array of ``count`` equally spaced values."""
    try:
        a, b, n = text.split(":")
        n = int(n)
        if n < 1:
            raise ValueError
        return np.linspace(parse_float(a), parse_float(b), n)
    except (ValueError, InputError) as exc:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}") from exc


def _domain_arg(text):
    """``interval:L``, ``rectangle:AxB``, ``disc:R`` or a path to a JSON domain."""
    from .grids import Disc, Interval, Rectangle

    if os.path.isfile(text):
        try:
            return parse_domain_checked(load_json(text))
        except InputError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    try:
        kind, _, rest = text.partition(":")
        if kind == "interval":
            return Interval(parse_float(rest))
        if kind == "rectangle":
            a, b = rest.lower().split("x")
            return Rectangle(parse_float(a), parse_float(b))
        if kind == "disc":
            return Disc(parse_float(rest))
    except (ValueError, InputError) as exc:
        raise argparse.ArgumentTypeError(f"bad domain {text!r}: {exc}") from exc
    raise argparse.ArgumentTypeError(f"bad domain {text!r} (interval:L, rectangle:AxB, disc:R)")


def _config(args):
    """Effective options; output destinations are left out so reports do not depend on them."""
    skip = {"func", "out", "plot", "csv"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if hasattr(v, "to_dict"):
            v = v.to_dict()
        elif isinstance(v, np.ndarray):
            v = [float(v[0]), float(v[-1]), int(v.size)] if v.size else []
        out[k] = v
    return out


def _envelope(args, result):
    return {"schema": SCHEMA_VERSION, "version": __version__, "command": args.command,
            "config": _config(args), "result": result}


def _emit(args, result, stream):
    text = dumps_json(_envelope(args, result))
    out = getattr(args, "out", None)
    if out and not out.lower().endswith((".svg", ".csv", ".png", ".pdf")):
        atomic_write(out, text)
    else:
        stream.write(text)


def _sibling(path, ext):
    return os.path.splitext(path)[0] + ext


def _load_problem(path):
    d = load_json(path)
    if not isinstance(d, dict):
        raise InputError(f"{path}: top level must be an object")
    return d


def _scalar_input(d, T=None):
    if "kind" in d:
        return parse_coefficient(d, T)
    if "coefficient" in d:
        return parse_coefficient(d["coefficient"], d.get("T", T))
    raise InputError("expected a scalar coefficient or an object with a 'coefficient' field")


# -- subcommands ---------------------------------------------------------------------


def cmd_constants(args, stream):
    from . import constants as C

    prob = args.problem
    T = args.T
    if prob == "periodic-l1":
        res = C.gamma1n_periodic(T, args.n).to_dict()
    elif prob == "antiperiodic-l1":
        res = C.gamma1n_antiperiodic(T, args.n).to_dict()
    elif prob == "periodic-linf":
        res = C.gamma_inf_periodic(T, args.n).to_dict()
    elif prob == "antiperiodic-lp":
        if args.p == 1:
            res = dict(C.gamma1n_antiperiodic(T, 0).to_dict(), problem="antiperiodic-lp", p=1.0)
        else:
            res = C.mp_antiperiodic(T, args.p).to_dict()
    elif prob == "neumann-lp":
        if args.domain is None:
            res = dict(C.mp_antiperiodic(T, args.p).to_dict(), problem="neumann-lp",
                       domain={"kind": "interval", "length": T})
        else:
            from .grids import Interval
            from .varmin import minimize_neumann_constrained

            if isinstance(args.domain, Interval):
                m = minimize_neumann_constrained(args.p, args.domain, mesh=args.mesh)
            else:
                m = minimize_neumann_constrained(args.p, args.domain, h=args.h)
            res = {"problem": "neumann-lp", "value": m.value, "attained": True, "p": args.p,
                   "domain": args.domain.to_dict(), "method": "constrained minimisation",
                   "minimization": m.to_dict()}
    else:  # dirichlet-lp
        raise InputError("dirichlet-lp constants are not implemented")
    _emit(args, res, stream)
    return EXIT_OK


def cmd_spectrum(args, stream):
    from .floquet import scalar_discriminant
    from .spectrum import Boundary, scalar_eigenvalues

    a = _scalar_input(_load_problem(args.input))
    kinds = [Boundary.PERIODIC, Boundary.ANTIPERIODIC] if args.boundary == "both" else [
        Boundary(args.boundary)]
    tables = {b.value: scalar_eigenvalues(a, b, args.count, args.steps) for b in kinds}
    if args.plot:
        from .plotting import discriminant_plot

        vals = np.concatenate([t.values for t in tables.values()])
        lo, hi = float(vals.min()), float(vals.max())
        pad = 0.15 * max(1.0, hi - lo)
        lams = np.linspace(lo - pad, hi + pad, 1200)
        delta = scalar_discriminant(a, lams, args.steps)[0]
        per = tables.get("periodic")
        anti = tables.get("antiperiodic")
        discriminant_plot(lams, delta, [] if per is None else per.values,
                          [] if anti is None else anti.values, path=args.plot)
    result = {"coefficient": a.to_dict(), "tables": {k: t.to_dict() for k, t in tables.items()}}
    if args.format == "csv":
        rows = [(k, *r) for k, t in tables.items() for r in t.csv_rows()]
        text = csv_text(["boundary", "index", "value", "multiplicity"], rows)
        if args.out:
            atomic_write(args.out, text)
        else:
            stream.write(text)
    else:
        _emit(args, result, stream)
    return EXIT_OK


def _coefficient_any(d):
    if d.get("kind") == "matrix" or "entries" in d:
        return parse_matrix(d)
    return _scalar_input(d)


def cmd_stability(args, stream):
    from .floquet import classify, monodromy

    A = _coefficient_any(_load_problem(args.input))
    m = monodromy(A, args.steps)
    v = classify(m, args.tol)
    _emit(args, {"coefficient": A.to_dict(), "verdict": v.to_dict(),
                 "monodromy": m.to_dict()}, stream)
    return EXIT_OK


def _template(T):
    from .floquet import MathieuTemplate

    return MathieuTemplate(T)


def _lyapunov_cells(sw, T):
    """Cells certified by the classical, rescaled Hill or paired zone criteria."""
    from . import constants as C
    from .coeffs import rescale_period

    cert = np.zeros((len(sw.alphas), len(sw.betas)), dtype=bool)
    for i, al in enumerate(sw.alphas):
        for j, be in enumerate(sw.betas):
            a = _template(T)(float(al), float(be))
            ok = C.classical_lyapunov_check(a, oracle=False).certified
            ok = ok or C.certify_hill_stability(rescale_period(a, math.pi), oracle=False).certified
            cert[i, j] = ok
    return cert


def cmd_sweep(args, stream):
    from .floquet import sweep
    from .plotting import stability_chart

    if not args.out.lower().endswith(".svg"):
        raise InputError("sweep --out must name an .svg file")
    sw = sweep(_template(args.T), args.alpha, args.beta, args.steps, args.tol, args.workers)
    cert = _lyapunov_cells(sw, args.T) if args.overlay else None
    title = f"a = alpha + beta cos(2 pi t / T), T = {args.T:g}"
    stability_chart(sw, cert, title=title, path=args.out)
    write_csv(_sibling(args.out, ".csv"), ["alpha", "beta", "class", "detail"], sw.rows())
    counts = {}
    for _, _, c, _ in sw.rows():
        counts[c] = counts.get(c, 0) + 1
    summary = {"svg": os.path.basename(args.out),
               "csv": os.path.basename(_sibling(args.out, ".csv")),
               "cells": int(sw.class_grid().size), "counts": counts, "failed": {f"{i},{j}": m for (i, j), m in sw.errors.items()},
               "template": "alpha + beta cos(2 pi t / T)"}
    if cert is not None:
        summary["certified_cells"] = int(cert.sum())
    atomic_write(_sibling(args.out, ".json"), dumps_json(_envelope(args, summary)))
    stream.write(dumps_json(_envelope(args, summary)))
    return EXIT_OK


def _certify_elliptic(d, args):
    from . import constants as C
    from .coeffs import SpatialCoefficient2D
    from .grids import build_grid

    domain = parse_domain_checked(d.get("domain", {}))
    h = parse_float(d.get("h", args.h if args.h else math.nan))
    if not h > 0:
        raise InputError("elliptic: grid spacing h is required")
    A = parse_field(d.get("A"), domain, h)
    ps = [parse_float(p) for p in d.get("p", [])]
    betas = d.get("betas")
    betas = None if betas is None else [parse_float(b) for b in betas]
    if "B" in d:
        B = parse_field(d["B"], domain, h)
    else:
        vals = np.asarray(A.values)
        if vals.ndim != 3 or vals.shape[1] != 2:
            raise InputError("elliptic: B may only be omitted for 2x2 systems")
        grid = build_grid(domain, h)
        if betas is None:
            betas = [C._beta_field(domain, h, p) for p in ps]
        gamma = C.choose_coupling_gamma(grid, vals, ps[0], ps[1], betas[0], betas[1])
        if gamma is None:
            gamma = max(1e-12, float(np.abs(vals[:, 0, 1]).max()))
        B = SpatialCoefficient2D(domain, h, C.coupling_bound_matrix(vals, gamma))
    return C.certify_elliptic_system(A, B, ps, betas=betas, oracle=not args.no_oracle)


def cmd_certify(args, stream):
    from . import constants as C

    d = _load_problem(args.input)
    kind = args.kind
    oracle = not args.no_oracle
    if kind in ("classical", "periodic-zone", "antiperiodic-zone", "hill", "disfocality"):
        a = _scalar_input(d)
        n = args.n if args.n is not None else d.get("n", 1)
        if kind == "classical":
            rep = C.classical_lyapunov_check(a, oracle=oracle)
        elif kind == "periodic-zone":
            rep = C.certify_periodic_zone(a, int(n), oracle=oracle, steps=args.steps)
        elif kind == "antiperiodic-zone":
            rep = C.certify_antiperiodic_zone(a, int(n), oracle=oracle, steps=args.steps)
        elif kind == "hill":
            if not math.isclose(a.T, math.pi, rel_tol=1e-12):
                raise InputError(f"hill certificate needs period pi (got T = {a.T}); "
                                 f"hint: {RESCALING_HINT}")
            p_max = args.p_max if args.p_max is not None else d.get("p_max")
            rep = C.certify_hill_stability(a, p_max, oracle=oracle, steps=args.steps)
        else:
            t0 = args.t0 if args.t0 is not None else d.get("t0")
            if t0 is None:
                raise InputError("disfocality needs t0 (flag --t0 or field 't0')")
            rep = C.two_step_disfocality(a, parse_float(t0), oracle=oracle)
    elif kind == "krein":
        P, B = parse_matrix(d["P"], d.get("T")), parse_matrix(d["B"], d.get("T"))
        rep = C.certify_krein_system(P, B, [parse_float(p) for p in d["p"]], oracle=oracle,
                                     steps=args.steps)
    elif kind == "coupling":
        P = parse_matrix(d["P"], d.get("T"))
        p1, p2 = (parse_float(p) for p in d["p"])
        rep = C.certify_2x2_coupling(P, p1, p2, oracle=oracle, steps=args.steps)
    else:
        rep = _certify_elliptic(d, args)
    result = rep.to_dict()
    result["verdict"] = rep.verdict
    _emit(args, result, stream)
    return EXIT_OK


def cmd_minimize(args, stream):
    from .grids import Interval
    from .varmin import minimize_antiperiodic_quotient, minimize_neumann_constrained

    if args.problem == "antiperiodic":
        res = minimize_antiperiodic_quotient(args.p, args.T, args.mesh, seed=args.seed,
                                             restarts=args.restarts)
        domain = None
    else:
        domain = args.domain or Interval(args.T)
        if isinstance(domain, Interval):
            res = minimize_neumann_constrained(args.p, domain, mesh=args.mesh, seed=args.seed,
                                               restarts=args.restarts)
        else:
            if args.h is None:
                raise InputError("2D domains need --h")
            res = minimize_neumann_constrained(args.p, domain, h=args.h, seed=args.seed,
                                               restarts=args.restarts)
    out = res.to_dict()
    if args.format == "csv":
        coords = np.asarray(res.coords).reshape(len(res.minimizer), -1)
        header = ["x"] if coords.shape[1] == 1 else ["x", "y"]
        text = csv_text(header + ["v"], [(*c, v) for c, v in zip(coords, res.minimizer)])
        if args.out:
            atomic_write(args.out, text)
        else:
            stream.write(text)
    else:
        _emit(args, out, stream)
    if args.plot:
        from .plotting import field_plot

        field_plot(res.coords, res.minimizer, title=f"minimiser, p = {args.p:g}", path=args.plot)
    return EXIT_OK


def cmd_pde(args, stream):
    from .pde import detect_nontrivial, mean_nonnegativity_counterexample, neumann_lambda1

    domain, h = args.domain, args.h
    if args.task == "lambda1":
        res = {"lambda1": neumann_lambda1(domain, h)}
    elif args.task == "detect":
        if not args.input:
            raise InputError("pde detect needs --input with a field")
        if args.input.lower().endswith(".csv"):
            a = read_field_csv(args.input)
            if a.domain != domain or not math.isclose(a.h, h):
                raise InputError("field CSV was written for a different domain or h")
        else:
            d = _load_problem(args.input)
            a = parse_field(d.get("field", d), domain, h)
        res = detect_nontrivial(domain, a, h, args.tol).to_dict()
    else:
        cex = mean_nonnegativity_counterexample(domain, args.n, h)
        res = cex.to_dict()
        if args.plot:
            from .grids import build_grid
            from .plotting import field_plot

            field_plot(build_grid(domain, h).coords, cex.coefficient,
                       title=f"counterexample coefficient, n = {args.n}", path=args.plot)
    res.update(domain=domain.to_dict(), h=h)
    _emit(args, res, stream)
    return EXIT_OK


def cmd_resonant(args, stream):
    from . import resonant as R

    d = _load_problem(args.input)
    domain = parse_domain_checked(d.get("domain", {}))
    h = parse_float(d.get("h", args.h if args.h else math.nan))
    if not h > 0:
        raise InputError("resonant: grid spacing h is required")
    if "nonlinearity" not in d:
        raise InputError("resonant: missing field 'nonlinearity'")
    spec = parse_nonlinearity(d["nonlinearity"], domain)
    rep = R.check_hypotheses(spec, domain, h)
    result = {"hypotheses": rep.to_dict(), "verdict": rep.verdict, "spec": spec.to_dict()}
    if rep.certified or args.force:
        sol = R.solve(spec, domain, h, max_iter=args.max_iter, tol=args.tol)
        result["solution"] = sol.to_dict()
        result["u_max"] = float(np.abs(sol.u).max())
        if args.newton:
            nw = R.newton_solve(spec, domain, h, tol=args.tol)
            result["newton"] = dict(nw.to_dict(), max_difference=float(np.abs(nw.u - sol.u).max()))
        if args.probe:
            result["uniqueness"] = R.uniqueness_probe(spec, domain, h, starts=args.probe,
                                                      seed=args.seed, tol=args.tol,
                                                      max_iter=args.max_iter,
                                                      workers=args.workers).to_dict()
        if args.csv:
            coords = np.asarray(sol.coords).reshape(len(sol.u), -1)
            U = np.asarray(sol.u).reshape(len(sol.u), -1)
            header = ["x", "y"][: coords.shape[1]] + [f"u{i + 1}" for i in range(U.shape[1])]
            write_csv(args.csv, header, [(*c, *u) for c, u in zip(coords, U)])
        if args.plot:
            from .plotting import field_plot

            U = np.asarray(sol.u).reshape(len(sol.u), -1)
            field_plot(sol.coords, U[:, 0], title="solution (first component)", path=args.plot)
    _emit(args, result, stream)
    return EXIT_OK


def cmd_selftest(args, stream):
    from .acceptance import run_all

    only = None
    if args.only:
        try:
            only = sorted({int(s) for s in args.only.split(",")})
        except ValueError as exc:
            raise InputError(f"--only expects comma-separated criterion numbers: {exc}") from exc
    t0 = time.perf_counter()
    results = run_all(only, echo=lambda line: print(line, file=sys.stderr, flush=True))
    total = time.perf_counter() - t0
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed in {total:.1f} s", file=sys.stderr)
    if args.out:
        atomic_write(args.out, dumps_json(_envelope(args, {
            "criteria": [r.to_dict() for r in results], "passed": passed,
            "total": len(results), "seconds": total})))
    return EXIT_OK if passed == len(results) else 1


# -- parser --------------------------------------------------------------------------


def build_parser():
    doc = __doc__.split("Problem files", 1)
    parser = argparse.ArgumentParser(
        prog="lyapunov-bvp", formatter_class=argparse.RawDescriptionHelpFormatter,
        description="Lyapunov constants, stability certificates and boundary value problem "
                    "oracles.", epilog="Problem files" + doc[1] if len(doc) == 2 else None)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")

    def add(name, func, help_, **kw):
        p = sub.add_parser(name, help=help_, description=help_,
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter, **kw)
        p.set_defaults(func=func)
        return p

    p = add("constants", cmd_constants, "closed-form or minimised Lyapunov constants")
    p.add_argument("--problem", required=True,
                   choices=["periodic-l1", "antiperiodic-l1", "periodic-linf", "antiperiodic-lp",
                            "neumann-lp", "dirichlet-lp"])
    p.add_argument("--T", type=_num, default=math.pi, help="period or interval length")
    p.add_argument("--n", type=int, default=0, help="zone index")
    p.add_argument("--p", type=_num, default=2.0, help="exponent")
    p.add_argument("--domain", type=_domain_arg, default=None,
                   help="neumann-lp: minimise on this domain instead of the closed form")
    p.add_argument("--mesh", type=int, default=512, help="elements (interval minimisation)")
    p.add_argument("--h", type=_num, default=1 / 32, help="grid spacing (2D minimisation)")
    p.add_argument("--out", help="JSON report path (default stdout)")

    p = add("spectrum", cmd_spectrum, "periodic / antiperiodic eigenvalues of a coefficient")
    p.add_argument("--input", required=True, help="scalar coefficient JSON")
    p.add_argument("--boundary", choices=["periodic", "antiperiodic", "both"], default="both")
    p.add_argument("--count", type=int, default=6)
    p.add_argument("--steps", type=int, default=2048, help="RK4 steps per period")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", help="report path (default stdout)")
    p.add_argument("--plot", help="discriminant figure path (.svg/.png/.pdf)")

    p = add("stability", cmd_stability, "Floquet classification of a scalar or matrix coefficient")
    p.add_argument("--input", required=True, help="scalar or matrix coefficient JSON")
    p.add_argument("--steps", type=int, default=2048, help="RK4 steps per period")
    p.add_argument("--tol", type=float, default=1e-7, help="boundary band (relative)")
    p.add_argument("--out", help="JSON report path (default stdout)")

    p = add("sweep", cmd_sweep, "stability chart of a + b cos(2 pi t / T) over a parameter grid")
    p.add_argument("--alpha", type=_range, required=True, help="start:stop:count")
    p.add_argument("--beta", type=_range, required=True, help="start:stop:count")
    p.add_argument("--T", type=_num, default=2 * math.pi)
    p.add_argument("--steps", type=int, default=2048, help="RK4 steps per period")
    p.add_argument("--tol", type=float, default=1e-7, help="boundary band (relative)")
    p.add_argument("--workers", type=int, default=1, help="process pool size")
    p.add_argument("--overlay", action="store_true",
                   help="hatch cells certified by the classical or rescaled Hill criteria")
    p.add_argument("--out", required=True, help="SVG path; .csv and .json siblings are written")

    p = add("certify", cmd_certify, "check the hypotheses of a stability / uniqueness criterion")
    p.add_argument("kind", choices=["classical", "periodic-zone", "antiperiodic-zone", "hill",
                                    "krein", "coupling", "elliptic", "disfocality"])
    p.add_argument("--input", required=True, help="problem JSON (see the top-level help)")
    p.add_argument("--n", type=int, default=None, help="zone index (zone certificates)")
    p.add_argument("--p-max", type=int, default=None, help="largest Hill index searched")
    p.add_argument("--t0", type=_num, default=None, help="split point (disfocality)")
    p.add_argument("--h", type=_num, default=None, help="grid spacing if absent from input")
    p.add_argument("--steps", type=int, default=2048, help="RK4 steps for the oracle")
    p.add_argument("--no-oracle", action="store_true", help="skip the independent cross-check")
    p.add_argument("--out", help="JSON report path (default stdout)")

    p = add("minimize", cmd_minimize, "minimise the antiperiodic or constrained Neumann quotient")
    p.add_argument("--problem", choices=["antiperiodic", "neumann"], default="antiperiodic")
    p.add_argument("--p", type=_num, required=True, help="exponent")
    p.add_argument("--T", type=_num, default=1.0, help="period / interval length")
    p.add_argument("--domain", type=_domain_arg, default=None, help="neumann: domain")
    p.add_argument("--mesh", type=int, default=512, help="elements (1D)")
    p.add_argument("--h", type=_num, default=None, help="grid spacing (2D)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--format", choices=["json", "csv"], default="json",
                   help="csv writes the minimiser")
    p.add_argument("--out", help="report path (default stdout)")
    p.add_argument("--plot", help="minimiser figure path")

    p = add("pde", cmd_pde, "Neumann eigenvalue, nontriviality test or counterexample")
    p.add_argument("task", choices=["lambda1", "detect", "counterexample"])
    p.add_argument("--domain", type=_domain_arg, required=True)
    p.add_argument("--h", type=_num, required=True, help="grid spacing")
    p.add_argument("--input", help="detect: field CSV, or JSON with a 'field' entry (or the "
                                   "field itself)")
    p.add_argument("--tol", type=float, default=1e-6, help="detect: relative threshold")
    p.add_argument("--n", type=_num, default=1.0, help="counterexample: shift n")
    p.add_argument("--out", help="JSON report path (default stdout)")
    p.add_argument("--plot", help="counterexample figure path")

    p = add("resonant", cmd_resonant, "solve a resonant Neumann problem by fixed-point iteration")
    p.add_argument("--input", required=True, help="resonant problem JSON")
    p.add_argument("--h", type=_num, default=None, help="grid spacing if absent from input")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--newton", action="store_true", help="cross-check with damped Newton")
    p.add_argument("--probe", type=int, default=0, help="number of random restarts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="threads for the uniqueness probe")
    p.add_argument("--force", action="store_true", help="solve even if not certified")
    p.add_argument("--out", help="JSON report path (default stdout)")
    p.add_argument("--csv", help="solution CSV path")
    p.add_argument("--plot", help="solution figure path")

    p = add("selftest", cmd_selftest, "run the acceptance criteria and print a pass/fail table")
    p.add_argument("--only", help="comma-separated criterion numbers (default all)")
    p.add_argument("--out", help="JSON summary path")
    return parser


def run(argv=None, stream=None):
    """Parse ``argv`` and execute; returns the process exit code."""
    stream = sys.stdout if stream is None else stream
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args, stream)
    except (InputError, KeyError) as exc:
        print(f"lyapunov-bvp: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"lyapunov-bvp: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"lyapunov-bvp: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
