"""Command-line interface: ``nonlocal-lsc <command> [options]``.

Every command prints a JSON report on stdout. With ``--out DIR`` the report
is also written to ``DIR/report.json`` next to CSV tables and SVG plots.

Exit codes: 0 completed, 2 a checker refuted its property (or a ``repro``
did not reproduce), 1 error, 64 usage error.
"""

import argparse
import hashlib
import json
import math
import os
import re
import sys
import time

import numpy as np

from . import __version__
from ._svg import line_plot
from .analysis import (BoundCertificate, PhiNonconvexError, check_homogeneous_bound,
                       check_null_class, check_phi_convex, check_separately_convex,
                       decompose, default_psi_suite, random_w_triples,
                       tabulate_g, tabulate_h, validate_p_bound_certificate,
                       wlsc_verdict)
from .expr import parse_expr, evaluate as eval_expr
from .functional import evaluate, phi_values
from .grid import (Domain, GridFunction, build_grid, grid_function_from_csv,
                   grid_function_to_csv, parse_domain, parse_exponent, parse_nodes)
from .integrand import builtin, check_pairwise_symmetry, parse, _BUILTINS
from .minimize import MinimizeConfig, minimize
from .verdict import DEFAULT_SEED, Sampler, jsonable
from .witness import (UNIT_SQUARE, SequencePlan, coverage_fraction,
                      homogeneous_witness, integrability_witness, lsc_probe,
                      oscillation_sequence)

EXIT_OK, EXIT_ERROR, EXIT_REFUTED, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


# -- shared option handling -----------------------------------------------


def _common(p):
    p.add_argument("--f", dest="f", default=None,
                   help="integrand: expression or builtin:name")
    p.add_argument("--grid", default="256", help="nodes per axis, N or N1,N2,...")
    p.add_argument("--domain", default=None, help="box lo,hi[;lo,hi...]")
    p.add_argument("--p", default="2", help="exponent 1, 2, ..., or inf")
    p.add_argument("--M", type=float, default=1.0, help="truncation level M > 0")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default=None, help="directory for report.json, CSV and SVG")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--n", type=int, default=None, help="codomain dimension (inferred)")


def _max_index(text, letters):
    found = [int(i) for i in re.findall(rf"\b[{letters}](\d+)\b", text)]
    return max(found) if found else 1


def _integrand(args, required=True):
    source = args.f
    if source is None:
        if required:
            raise UsageError("--f is required")
        return None
    name = source[len("builtin:"):] if source.startswith("builtin:") else source
    if name in _BUILTINS:
        return builtin(name)
    domain = _domain(args, None)
    n = args.n or _max_index(source, "wz")
    return parse(source, domain.dim_m, n, domain=domain)


def _domain(args, f):
    if args.domain:
        return parse_domain(args.domain)
    if f is not None and f.domain is not None:
        return f.domain
    m = _max_index(args.f or "", "xy") if args.f else 1
    return Domain.unit_cube(m)


def _grid(args, f):
    domain = _domain(args, f)
    return build_grid(domain, parse_nodes(args.grid, domain.dim_m))


def _vector(text, n):
    vals = [float(t) for t in str(text).split(",")]
    return np.array(vals * n if len(vals) == 1 else vals)


def _grid_function(source, grid, n, p):
    """A constant ``c[,c2...]`` or a CSV file written by this tool."""
    if source is None:
        return GridFunction.constant(grid, np.zeros(n), p)
    if os.path.exists(source):
        return grid_function_from_csv(source, grid, p)
    return GridFunction.constant(grid, _vector(source, n), p)


def _range(text, default):
    lo, hi, count = (text or default).split(",")
    return np.linspace(float(lo), float(hi), int(count))


# -- commands -------------------------------------------------------------


def cmd_eval(args, art):
    f = _integrand(args)
    grid = _grid(args, f)
    u = _grid_function(args.u, grid, f.dim_n, parse_exponent(args.p))
    v = evaluate(f, u, threads=args.threads)
    return v.to_dict(), EXIT_OK


def cmd_phi(args, art):
    f = _integrand(args)
    grid = _grid(args, f)
    psi = _grid_function(args.psi, grid, f.dim_n, parse_exponent(args.p))
    x = _vector(args.x, grid.dim_m)
    ws = _range(args.w_range, "-2,2,41")
    W = np.stack([ws] + [np.zeros_like(ws)] * (f.dim_n - 1), axis=1)
    vals = phi_values(f, x, psi, W)
    art["phi.csv"] = "w_1,phi\n" + "".join(f"{w!r},{v!r}\n" for w, v in
                                          zip(ws.tolist(), vals.tolist()))
    art["phi.svg"] = line_plot({"phi": (ws, vals)}, "profile in w", "w_1", "phi")
    return {"x": x, "samples": len(ws), "min": float(vals.min()),
            "max": float(vals.max())}, EXIT_OK


def cmd_check(args, art):
    f = _integrand(args)
    p = parse_exponent(args.p)
    sampler = Sampler(budget=args.budget, seed=args.seed)
    kind = args.kind
    if kind == "symmetry":
        v = check_pairwise_symmetry(f, args.budget, args.seed)
    elif kind == "homogeneous-bound":
        v = check_homogeneous_bound(f, p, args.M, sampler)
    elif kind == "p-bound":
        grid = _grid(args, f)
        cert = BoundCertificate.constant(grid, args.M, args.alpha, args.beta, args.C, p)
        v = validate_p_bound_certificate(f, cert, p, sampler)
    elif kind == "sep-convex":
        v = check_separately_convex(f, sampler)
    elif kind == "phi-convex":
        suite = default_psi_suite(f, args.psi_count, parse_nodes(args.grid, 1)[0], args.seed)
        v = check_phi_convex(f, suite, w_triples=random_w_triples(f.dim_n, args.triples,
                                                                   args.seed),
                             seed=args.seed, hessian=f.smooth_w)
    else:  # wlsc
        suite = default_psi_suite(f, args.psi_count, parse_nodes(args.grid, 1)[0], args.seed)
        report = wlsc_verdict(f, p, suite, sampler,
                              w_triples=random_w_triples(f.dim_n, args.triples, args.seed))
        return report.to_dict(), EXIT_REFUTED if report.refuted else EXIT_OK
    return v.to_dict(), EXIT_REFUTED if v.refuted else EXIT_OK


def _parse_E(text):
    if text in (None, "unit-square"):
        return UNIT_SQUARE
    return tuple(tuple(float(t) for t in part.split(",")) for part in text.split(";"))


def cmd_witness(args, art):
    kind = args.kind
    p = parse_exponent(args.p)
    if kind == "checkerboard":
        frac = coverage_fraction(_parse_E(args.E), args.delta, args.resolution)
        return {"delta": args.delta, "resolution": args.resolution, "fraction": frac,
                "quarter_gap": abs(frac - 0.25)}, EXIT_OK
    if kind == "oscillation":
        domain = parse_domain(args.domain) if args.domain else Domain.unit_cube(1)
        grid = build_grid(domain, parse_nodes(args.grid, domain.dim_m))
        n = args.n or 1
        w1 = _grid_function(args.omega1, grid, n, p)
        w2 = _grid_function(args.omega2, grid, n, p)
        u = oscillation_sequence(args.theta, w1, w2, args.k)
        art["u.csv"] = grid_function_to_csv(u)
        art["u.svg"] = line_plot({"u_k": (grid.nodes[:, 0], u.values[:, 0])},
                                 f"oscillation k={args.k}", "x_1", "u")
        return {"theta": args.theta, "k": args.k, "nodes": grid.size,
                "mean": float(u.values.mean(axis=0)[0])}, EXIT_OK
    f = _integrand(args)
    if kind == "integrability":
        grid = _grid(args, f)
        phi = _grid_function(args.phi, grid, f.dim_n, p)
        psi = _grid_function(args.psi, grid, f.dim_n, p)
        r = integrability_witness(f, phi, psi, levels=args.levels)
    else:
        r = homogeneous_witness(f, p, args.M, blocks=args.blocks, cells=args.cells,
                                sampler=Sampler(seed=args.seed))
        if r.found:
            tj = r.diagnostics["truncated_J"]
            art["blocks.svg"] = line_plot({"J_K": (range(1, len(tj) + 1), tj)},
                                          "block-truncated J", "K", "J")
    if r.found and args.out:
        art["u.csv"] = grid_function_to_csv(r.u)
    return r.to_dict(), EXIT_OK


def cmd_probe(args, art):
    f = _integrand(args)
    grid = _grid(args, f)
    p = parse_exponent(args.p)
    if args.plan == "scalar-shrink":
        plan = SequencePlan.scalar_shrink(grid, args.c, f.dim_n)
    else:
        plan = SequencePlan.oscillation(args.theta,
                                        _grid_function(args.omega1, grid, f.dim_n, p),
                                        _grid_function(args.omega2, grid, f.dim_n, p))
    r = lsc_probe(f, plan, args.k_max, threads=args.threads)
    _probe_artifacts(art, "probe", r, f"lsc probe: {plan.name}")
    return r.to_dict(), EXIT_REFUTED if r.violated else EXIT_OK


def cmd_decompose(args, art):
    f = _integrand(args)
    grid = _grid(args, f)
    W = _range(args.w_range, "-2,2,33")
    ladder = [float(t) for t in args.ladder.split(",")]
    try:
        dec = decompose(f, grid, W, ladder, sampler=Sampler(seed=args.seed,
                                                           radius=float(np.max(np.abs(W))),
                                                           domain=grid.domain))
    except PhiNonconvexError as exc:
        return {"status": "phi-nonconvex", "message": str(exc),
                "location": exc.location}, EXIT_REFUTED
    if args.out:
        for name, text in dec.tables_csv().items():
            art[f"{name}.csv"] = text
    out = dec.summary()
    out["status"] = "decomposed"
    return out, EXIT_OK


def _table_fn(text, kinds):
    node = parse_expr(text, 1, 1)

    def fn(*arrays):
        env = {}
        for kind, arr in zip(kinds, arrays):
            arr = np.asarray(arr, dtype=float)
            if kind == "w":
                env["w1"] = arr
            else:
                for k in range(arr.shape[-1]):
                    env[f"{kind}{k + 1}"] = arr[..., k]
        return eval_expr(node, env)
    return fn


def cmd_nullclass(args, art):
    domain = parse_domain(args.domain) if args.domain else Domain.unit_cube(1)
    grid = build_grid(domain, parse_nodes(args.grid, domain.dim_m))
    W = _range(args.w_range, "-2,2,33")
    g = tabulate_g(_table_fn(args.g, "xyw"), grid, W)
    h = tabulate_h(_table_fn(args.h, "xy"), grid)
    v = check_null_class(g, h, grid, W, args.trials, args.seed)
    return v.to_dict(), EXIT_REFUTED if v.refuted else EXIT_OK


def cmd_minimize(args, art):
    f = _integrand(args)
    grid = _grid(args, f)
    u0 = _grid_function(args.u0, grid, f.dim_n, parse_exponent(args.p))
    cfg = MinimizeConfig(max_iters=args.max_iters, grad_tol=args.grad_tol, box=args.box)
    r = minimize(f, u0, cfg, threads=args.threads)
    art["trace.csv"] = r.trace_csv()
    its = [t[0] for t in r.trace]
    art["trace.svg"] = line_plot({"J": (its, [t[1] for t in r.trace])},
                                 "descent trace", "iteration", "J")
    if args.out:
        art["u_star.csv"] = grid_function_to_csv(r.u_star)
    return r.to_dict(), EXIT_OK


# -- reproductions --------------------------------------------------------


def _probe_artifacts(art, stem, report, title="functional along the sequence"):
    ks = list(range(1, len(report.J_values) + 1))
    art[f"{stem}.csv"] = report.to_csv()
    art[f"{stem}.svg"] = line_plot({"J(u_k)": (ks, report.J_values),
                                    "J(limit)": ([ks[0], ks[-1]], [report.J_limit] * 2)},
                                   title, "k", "J")


def _repro_example3(art):
    f = builtin("example-3-divergent")
    grid = build_grid(f.domain, [512])
    values = {c: float(evaluate(f, GridFunction.constant(grid, c)).value)
              for c in (0.25, 0.5, 1.0, 2.0)}
    expected = {0.25: 1.0, 0.5: 1.0, 1.0: 1.0, 2.0: 0.0}
    cert_grid = build_grid(f.domain, [64])
    cert = BoundCertificate.constant(cert_grid, 1.0, 1e4, 1e4, 1e4, 2.0)
    bound = validate_p_bound_certificate(f, cert)
    ok = all(abs(values[c] - expected[c]) <= 2e-2 for c in values) and bound.refuted
    art["J_by_constant.csv"] = "c,J\n" + "".join(f"{c!r},{v!r}\n" for c, v in values.items())
    return ok, False, {"J": {str(c): v for c, v in values.items()},
                       "expected": {str(c): v for c, v in expected.items()},
                       "p_bound_certificate": bound.to_dict()}


def _repro_example4(art):
    f = builtin("example-4-nonlsc")
    grid = build_grid(f.domain, [1024])
    r = lsc_probe(f, SequencePlan.scalar_shrink(grid), 32)
    ok = (r.violated and abs(r.margin - 1.0) <= 2e-2 and abs(r.J_limit) <= 1e-12
          and all(abs(v + 1.0) <= 2e-2 for v in r.J_values))
    _probe_artifacts(art, "probe", r)
    return ok, True, {"probe": r.to_dict(), "margin": r.margin}


def _repro_n2(art):
    f = builtin("example-n2-vector")
    suite = default_psi_suite(f, 10, 64, DEFAULT_SEED)
    phi = check_phi_convex(f, suite, w_triples=random_w_triples(2, 50), hessian=True)
    sym = check_pairwise_symmetry(f)
    sep = check_separately_convex(f)
    ok = phi.passed and sym.refuted and phi.details["min_hessian_det"] >= -1e-6
    return ok, False, {"phi_convexity": phi.to_dict(), "symmetry": sym.to_dict(),
                       "separate_convexity": sep.to_dict(), "choice_dependent": True}


def _repro_checkerboard(art):
    fr = {f"2^-{a}": coverage_fraction(UNIT_SQUARE, 2.0**-a, 4096) for a in range(6, 11)}
    ok = all(v >= 0.2 for v in fr.values()) and abs(fr["2^-10"] - 0.25) <= 0.01
    art["coverage.csv"] = "delta,fraction\n" + "".join(
        f"{2.0**-a!r},{fr[f'2^-{a}']!r}\n" for a in range(6, 11))
    art["coverage.svg"] = line_plot({"fraction": (list(range(6, 11)), list(fr.values())),
                                     "1/4": ([6, 10], [0.25, 0.25])},
                                    "checkerboard coverage", "-log2(delta)", "fraction")
    return ok, False, {"fractions": fr}


def _repro_homogeneous(art):
    f = parse("exp(w1 * z1)", 1, 1, domain=Domain.unit_cube(1))
    r = homogeneous_witness(f, 1.0)
    d = r.diagnostics
    ok = r.found and d["norm"] <= 1 + 1e-9 and min(d["increments"]) >= 0.2
    if r.found:
        ks = list(range(1, len(d["truncated_J"]) + 1))
        art["truncated_J.csv"] = "blocks,J\n" + "".join(
            f"{k},{v!r}\n" for k, v in zip(ks, d["truncated_J"]))
        art["truncated_J.svg"] = line_plot({"J": (ks, d["truncated_J"])},
                                           "block-truncated functional", "blocks", "J")
    return ok, True, r.to_dict()


def _repro_decomposition(art):
    f = builtin("weighted-quadratic")
    grid = build_grid(f.domain, [64])
    W = np.linspace(-2.0, 2.0, 33)
    dec = decompose(f, grid, W)
    X = grid.nodes[:, 0]
    g_err = float(np.abs(dec.g - (X[None, :, None] - 0.5) * W[None, None, :] ** 2).max())
    ft_err = float(np.abs(dec.f_tilde_table()
                          - (W[:, None] ** 2 / 4 + W[None, :] ** 2 / 4)[None, None]).max())
    try:
        decompose(parse("neg(w1^2) - z1^2", 1, 1), grid, W, verify=False)
        raised = False
    except PhiNonconvexError:
        raised = True
    sep = dec.checks["separate_convexity"]["status"] == "evidence-passed"
    ok = g_err <= 1e-3 and ft_err <= 1e-3 and sep and raised
    for name, text in dec.tables_csv().items():
        art[f"{name}.csv"] = text
    return ok, False, {"g_max_error": g_err, "f_tilde_max_error": ft_err,
                       "f_tilde_separately_convex": sep, "concave_case_raises": raised}


def _repro_dichotomy(art):
    out, ok = {}, True
    grid = build_grid(Domain.unit_cube(1), [512])
    plan = SequencePlan.oscillation(0.5, GridFunction.constant(grid, 1.0),
                                    GridFunction.constant(grid, -1.0))
    for text, want in (("neg((w1 - z1)^2)", "wlsc-refuted"), ("(w1 - z1)^2", "wlsc-evidence")):
        f = parse(text, 1, 1, symmetric="declared", domain=Domain.unit_cube(1))
        rep = wlsc_verdict(f)
        probe = lsc_probe(f, plan, 32)
        target = -2.0 if want == "wlsc-refuted" else 2.0
        _probe_artifacts(art, "probe_" + ("concave" if target < 0 else "convex"), probe)
        ok &= (rep.verdict == want and abs(probe.liminf_estimate - target) <= 5e-2
               and probe.violated == (want == "wlsc-refuted"))
        out[text] = {"wlsc": rep.verdict, "criterion": rep.criterion,
                     "liminf": probe.liminf_estimate, "probe": probe.verdict}
    return ok, False, out


REPRO = {
    "example-3-divergent": (_repro_example3, "J(psi) = measure of psi^-1((0,1]); no p-bound"),
    "example-4-nonlsc": (_repro_example4, "liminf J(1/k) = -1 < 0 = J(0)"),
    "example-n2-vector": (_repro_n2, "profiles convex although f is asymmetric"),
    "checkerboard-quarter": (_repro_checkerboard, "S x S^c covers about 1/4"),
    "homogeneous-blowup": (_repro_homogeneous, "exp(wz) admits a blow-up witness"),
    "separable-decomposition": (_repro_decomposition, "g = (y - 1/2) w^2"),
    "weak-lsc-dichotomy": (_repro_dichotomy, "-(w-z)^2 refuted, (w-z)^2 holds"),
}


def cmd_repro(args, art):
    fn, claim = REPRO[args.id]
    ok, headline_refutes, details = fn(art)
    out = {"id": args.id, "claim": claim, "reproduced": bool(ok),
           "headline_is_refutation": headline_refutes, "details": details}
    if "margin" in details:
        out["margin"] = details["margin"]
    code = EXIT_REFUTED if (not ok or headline_refutes) else EXIT_OK
    return out, code


# -- parser and entry point ----------------------------------------------


def build_parser():
    parser = _Parser(prog="nonlocal-lsc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="quadrature value of J(u)")
    _common(p)
    p.add_argument("--u", default=None, help="constant c[,c2..] or grid-function CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("phi", help="profile w -> int f(x, y, w, psi(y)) dy as CSV")
    _common(p)
    p.add_argument("--x", default="0.5")
    p.add_argument("--psi", default=None)
    p.add_argument("--w-range", default=None, help="lo,hi,count")
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("check", help="sampled property checks")
    p.add_argument("kind", choices=["symmetry", "homogeneous-bound", "p-bound",
                                    "sep-convex", "phi-convex", "wlsc"])
    _common(p)
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--psi-count", type=int, default=10)
    p.add_argument("--triples", type=int, default=50)
    p.set_defaults(func=cmd_check, grid="64")

    p = sub.add_parser("witness", help="checkerboards, oscillations, divergence witnesses")
    p.add_argument("kind", choices=["checkerboard", "oscillation", "integrability",
                                    "homogeneous"])
    _common(p)
    p.add_argument("--delta", type=float, default=2.0**-10)
    p.add_argument("--E", default="unit-square", help="unit-square or lo,hi;lo,hi")
    p.add_argument("--resolution", type=int, default=4096)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--omega1", default="1")
    p.add_argument("--omega2", default="-1")
    p.add_argument("--phi", default="0")
    p.add_argument("--psi", default="1")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--blocks", type=int, default=8)
    p.add_argument("--cells", type=int, default=1 << 16)
    p.set_defaults(func=cmd_witness, grid="64")

    p = sub.add_parser("probe", help="lower semi-continuity probe along a sequence")
    _common(p)
    p.add_argument("--plan", choices=["scalar-shrink", "oscillation"], default="oscillation")
    p.add_argument("--k-max", type=int, default=32)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--omega1", default="1")
    p.add_argument("--omega2", default="-1")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("decompose", help="separately convex decomposition tables (n = 1)")
    _common(p)
    p.add_argument("--w-range", default=None, help="lo,hi,count (must contain 0)")
    p.add_argument("--ladder", default="1,2,4,8,16,32,64,128")
    p.set_defaults(func=cmd_decompose, grid="64")

    p = sub.add_parser("nullclass", help="null-class check of g(x,y,w) + g(y,x,z) + h(x,y)")
    _common(p)
    p.add_argument("--g", required=True, help="expression in x1.., y1.., w1")
    p.add_argument("--h", default="0", help="expression in x1.., y1..")
    p.add_argument("--w-range", default=None)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_nullclass, grid="128")

    p = sub.add_parser("minimize", help="projected gradient descent on J")
    _common(p)
    p.add_argument("--u0", default=None)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--grad-tol", type=float, default=1e-7)
    p.add_argument("--box", type=float, default=None, help="bound |u| <= box")
    p.set_defaults(func=cmd_minimize, grid="64")

    p = sub.add_parser("repro", help="reproduce a worked example")
    p.add_argument("id", choices=sorted(REPRO))
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_repro)
    return parser


def _digest(args):
    payload = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    h = hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode())
    for key in ("u", "psi", "u0", "phi"):
        path = payload.get(key)
        if isinstance(path, str) and os.path.exists(path):
            with open(path, "rb") as fh:
                h.update(fh.read())
    return h.hexdigest()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    artifacts = {}
    try:
        result, code = args.func(args, artifacts)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"nonlocal-lsc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # reported, not raised: exit code 1 means tool error
        print(f"nonlocal-lsc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    label = args.command + (f" {args.kind}" if hasattr(args, "kind") else "") \
        + (f" {args.id}" if hasattr(args, "id") else "")
    report = {"command": label, "inputs_digest": _digest(args),
              "seed": args.seed, "result": jsonable(result), "exit_code": code,
              "version": __version__,
              "wall_time_s": round(time.perf_counter() - start, 6)}
    text = json.dumps(report, sort_keys=True, indent=2)
    print(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        for name, content in artifacts.items():
            with open(os.path.join(args.out, name), "w", encoding="utf-8") as fh:
                fh.write(content)
    return code


if __name__ == "__main__":
    sys.exit(main())
