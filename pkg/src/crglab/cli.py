"""Command-line surface wiring the modules together.

Every artifact written here is byte-deterministic: floats are printed with
17 significant digits, line endings are LF, JSON key order is fixed, and all
sampling is seeded. CRG_THREADS caps worker parallelism without changing any
output byte.

Exit codes: 0 success, 1 usage or parse failure, 2 numeric failure
(overflow / zero-hit dominating), 3 certificate or audit failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import analytic, criteria, covering, dynamics, growth, models
from .errors import (
    BelowThreshold,
    CertificateFailure,
    ContourTooClose,
    CrgLabError,
    NearZero,
    NonConvergent,
    NonIntegerResidue,
    OverflowUnrepresentable,
    ParseError,
    ZeroHit,
    ZeroInDisk,
)
from .parser import ExpSumNode, FunctionSpecAST, ProductNode, parse_function_spec

_NUMERIC_ERRORS = (OverflowUnrepresentable, ZeroHit, NearZero, ContourTooClose,
                   NonIntegerResidue, ZeroInDisk, NonConvergent, BelowThreshold)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_bytes(path: str, payload: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(payload)


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        cells = [_fmt(c) if isinstance(c, float) else str(c) for c in row]
        lines.append(",".join(cells))
    write_bytes(path, ("\n".join(lines) + "\n").encode("ascii"))


def write_json(path: str, obj: dict) -> None:
    write_bytes(path, (json.dumps(obj, indent=2) + "\n").encode("ascii"))


def build_model(ast: FunctionSpecAST, r_max: float) -> models.FunctionModel:
    """Materialise an AST; products fix their cutoff for radii up to r_max."""
    if isinstance(ast, ExpSumNode):
        return models.ExponentialSum([(t.coeffs, t.exponent) for t in ast.terms])
    rule = models.PowerZeroRule(exponent=ast.power, angle=ast.angle)
    return models.CanonicalProduct(rule, ast.genus, ast.cut, r_max)


def default_order(ast: FunctionSpecAST) -> growth.ProximateOrder:
    if isinstance(ast, ExpSumNode):
        return growth.ProximateOrder.constant(1.0)
    return growth.ProximateOrder.constant(1.0 / ast.power)


def _parse_plan(text: str) -> criteria.SamplePlan:
    parts = text.split(":")
    if parts[0] == "mc" and len(parts) == 3:
        return criteria.MonteCarloPlan(int(float(parts[1])), int(parts[2]))
    if parts[0] == "grid" and len(parts) == 3:
        return criteria.GridPlan(int(parts[1]), int(parts[2]))
    raise argparse.ArgumentTypeError(
        f"plan must be 'mc:<n>:<seed>' or 'grid:<n1>:<n2>', got {text!r}")


def _parse_window(text: str) -> criteria.Window:
    try:
        x0, x1, y0, y1 = (float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"window must be 'x0,x1,y0,y1', got {text!r}")
    return criteria.Window(x0, x1, y0, y1)


def _parse_samples(text: str) -> list[tuple[float, float]]:
    out = []
    for piece in text.split(";"):
        r_s, theta_s = piece.split(":")
        out.append((float(r_s), float(theta_s)))
    return out


def _parse_beta(text: str, po: growth.ProximateOrder,
                cascade_n: int) -> growth.GrowthMinorant:
    kind, _, rest = text.partition(":")
    if kind == "exp-power":
        c_s, mu_s = rest.split(",")
        return growth.GrowthMinorant.exp_power(float(c_s), float(mu_s))
    if kind == "growth-scale":
        n = int(rest) if rest else cascade_n
        return growth.GrowthMinorant.growth_scale(po, growth.EpsilonCascade(n))
    raise argparse.ArgumentTypeError(
        f"beta must be 'exp-power:<c>,<mu>' or 'growth-scale[:<N>]', got {text!r}")


def _read_points_file(path: str) -> list[complex]:
    pts = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            if line.strip():
                re_s, im_s = line.split()[:2]
                pts.append(complex(float(re_s), float(im_s)))
    return pts


# ---------------------------------------------------------------------------
# subcommands

def _cmd_indicator(args: argparse.Namespace) -> int:
    ast = parse_function_spec(args.fn)
    radii = [float(r) for r in args.radii.split(",")]
    model = build_model(ast, max(radii))
    po = default_order(ast)
    thetas = np.arange(args.thetas) * (2.0 * math.pi / args.thetas)
    emp = growth.indicator_empirical(model, po, thetas, radii)
    if isinstance(ast, ExpSumNode):
        exact = growth.indicator_exact_expsum(model)
        h_exact = [exact.h(t) for t in thetas]
    else:
        rho = po.rho_limit
        h_exact = [math.pi * math.cos((t - math.pi) * rho) / math.sin(math.pi * rho)
                   for t in thetas]
    rows = [(float(t), float(he), float(hm))
            for t, he, hm in zip(thetas, h_exact, emp.values)]
    write_csv(args.out, ["theta", "h_exact", "h_empirical"], rows)
    return 0


def _cmd_density(args: argparse.Namespace) -> int:
    ast = parse_function_spec(args.fn)
    ann = criteria.AnnulusSpec(args.r)
    # B-certificate disks stay within 1.5 |z| for A-members
    model = build_model(ast, ann.outer * 1.55)
    beta = _parse_beta(args.beta, default_order(ast), args.N)
    if args.set == "A":
        pred = criteria.predicate_A(model, beta)
    else:
        pred = criteria.predicate_B(model, beta, disk_samples=args.disk_samples)
    if args.exclude_disks:
        with open(args.exclude_disks, encoding="ascii") as fh:
            disks = covering.DiskSet.from_text(fh.read())
        rep = criteria.density_with_exclusions(pred, ann, disks, args.plan)
    else:
        rep = criteria.annulus_density(pred, ann, args.plan)
    out = rep.to_json_dict()
    out["set"] = args.set
    write_json(args.out, out)
    return 0


def _cmd_check14(args: argparse.Namespace) -> int:
    ast = parse_function_spec(args.fn)
    r_list = [float(r) for r in args.r_list.split(",")]
    model = build_model(ast, 3.1 * max(r_list))
    po = default_order(ast)
    cascade = growth.EpsilonCascade(args.N)
    beta = growth.GrowthMinorant.growth_scale(po, cascade)
    alpha = growth.DensityBudget.sector_budget(args.m_arcs, cascade)
    series = growth.series_condition_check(alpha, beta, args.r0, args.tail_tol)
    margins = criteria.hypothesis_check_14b(model, beta, alpha, r_list,
                                            args.plan,
                                            disk_samples=args.disk_samples)
    write_json(args.out, {
        "format_version": 1,
        "series": {
            "converges": series.converges,
            "partial_sum": series.partial_sum,
            "terms_used": series.terms_used,
            "r0": args.r0,
        },
        "margins": [
            {"r": m.r, "density": m.density, "alpha": m.alpha,
             "margin": m.margin, "flagged": m.flagged}
            for m in margins
        ],
    })
    return 0


def _build_dynamics_model(ast: FunctionSpecAST,
                          bailout_log: float) -> models.FunctionModel:
    """Orbits are followed out to |z| = exp(bailout_log); a product must be
    certified that far, which is only tractable for modest bailouts."""
    if isinstance(ast, ProductNode):
        if bailout_log > 34.0:
            raise ValueError(
                "product orbits need --bailout-log <= 34 so the truncation "
                "stays certifiable out to exp(bailout_log)")
        return build_model(ast, math.exp(bailout_log) * 1.01)
    return build_model(ast, 1.0)


def _cmd_escape_map(args: argparse.Namespace) -> int:
    ast = parse_function_spec(args.fn)
    w = args.window
    model = _build_dynamics_model(ast, args.bailout_log)
    beta = _parse_beta(args.beta, default_order(ast), args.N)
    width, height = (int(p) for p in args.size.split("x"))
    emap = dynamics.escape_map(model, w, width, height, args.r0, beta,
                               args.max_iter, args.bailout_log)
    write_bytes(args.out, emap.to_pgm())
    return 0


def _cmd_measure(args: argparse.Namespace) -> int:
    ast = parse_function_spec(args.fn)
    if args.annulus is not None:
        region: criteria.Region = criteria.AnnulusSpec(args.annulus)
        r0 = args.r0 if args.r0 is not None else args.annulus / 2.0
    else:
        if args.window is None:
            print("measure needs --window or --annulus", file=sys.stderr)
            return 1
        region = args.window
        if args.r0 is None:
            print("measure on a window needs --r0", file=sys.stderr)
            return 1
        r0 = args.r0
    model = _build_dynamics_model(ast, args.bailout_log)
    beta = _parse_beta(args.beta, default_order(ast), args.N)
    rep = dynamics.measure_estimate(model, region, args.plan, beta, r0,
                                    args.max_iter, args.bailout_log)
    write_json(args.out, rep.to_json_dict())
    return 0


def _cmd_verify_crg(args: argparse.Namespace) -> int:
    ast = parse_function_spec(args.fn)
    if not isinstance(ast, ProductNode):
        print("verify-crg requires a product spec", file=sys.stderr)
        return 1
    samples = _parse_samples(args.samples)
    model = build_model(ast, max(r for r, _ in samples) * 1.01)
    po = default_order(ast)
    cascade = growth.EpsilonCascade(args.N)
    rows = analytic.verify_crg_ray_product(model, args.c, po, cascade, samples,
                                         args.hypothesis_constant)
    write_csv(args.out,
              ["r", "theta", "measured", "predicted", "normalized_residual",
               "eps_residual"],
              [(c.r, c.theta, c.measured, c.predicted, c.normalized_residual,
                c.eps_residual) for c in rows])
    return 0


def _cmd_covering(args: argparse.Namespace) -> int:
    if args.construction == "besicovitch":
        pts = _read_points_file(args.points)
        radii = [float(x) for x in
                 open(args.radii, encoding="ascii").read().split()]
        if len(radii) != len(pts):
            print("radii file length mismatch", file=sys.stderr)
            return 1
        lookup = {i: r for i, r in enumerate(radii)}
        index = {complex(p): i for i, p in enumerate(pts)}
        disks = covering.besicovitch_cover(pts, lambda p: lookup[index[complex(p)]])
        cert = covering.besicovitch_audit(pts, disks, args.probes, args.seed)
        cert_obj = {
            "format_version": 1,
            "construction": "besicovitch",
            "covers_all": cert.covers_all,
            "max_multiplicity": cert.max_multiplicity,
            "multiplicity_limit": covering.BESICOVITCH_MAX_MULTIPLICITY,
            "n_probes": cert.n_probes,
            "n_selected": cert.n_selected,
        }
    elif args.construction == "fuchs":
        pts = _read_points_file(args.points)
        disks, fc = covering.fuchs_macintyre_disks(pts, args.H, args.probes)
        cert_obj = {
            "format_version": 1,
            "construction": "fuchs-macintyre",
            "n_points": fc.n_points,
            "n_disks": fc.n_disks,
            "H": fc.H,
            "sum_sq_radii": fc.sum_sq_radii,
            "budget": fc.budget,
            "harmonic_bound": fc.harmonic_bound,
            "max_harmonic_sum": fc.max_harmonic_sum,
            "n_probes": fc.n_probes,
        }
    else:
        zeros = _read_points_file(args.zeros)
        disks, cc = covering.cartan_levin_disks(zeros, args.R, args.eta,
                                                args.probes)
        cert_obj = {
            "format_version": 1,
            "construction": "cartan-levin",
            "n_zeros": cc.n_zeros,
            "n_disks": cc.n_disks,
            "eta": cc.eta,
            "R": cc.R,
            "sum_radii": cc.sum_radii,
            "budget": cc.budget,
            "log_max_modulus_2eR": cc.log_m_2eR,
            "bound_rhs": cc.bound_rhs,
            "min_log_g": cc.min_log_g,
            "n_probes": cc.n_probes,
        }
    write_bytes(args.out_disks, disks.to_text().encode("ascii"))
    write_json(args.out_cert, cert_obj)
    return 0


def _cmd_schwarz_check(args: argparse.Namespace) -> int:
    ast = parse_function_spec(args.fn)
    samples = _parse_samples(args.samples)   # r:theta pairs for disk centers
    model = build_model(ast, max(r for r, _ in samples) * 1.2 + args.t_r)
    rows = []
    for r, theta in samples:
        z = r * complex(math.cos(theta), math.sin(theta))
        rec = analytic.schwarz_log_derivative(model, z, args.t_r, args.nodes)
        direct = models.log_derivative(model, z)
        denom = max(abs(direct), 1e-300)
        rows.append((z.real, z.imag, args.t_r, rec.real, rec.imag,
                     direct.real, direct.imag, abs(rec - direct) / denom))
    write_csv(args.out,
              ["z_re", "z_im", "t_r", "schwarz_re", "schwarz_im",
               "direct_re", "direct_im", "rel_diff"], rows)
    return 0


def _cmd_check_8l(args: argparse.Namespace) -> int:
    ast = parse_function_spec(args.fn)
    if not isinstance(ast, ExpSumNode):
        print("check-8l requires an expsum spec", file=sys.stderr)
        return 1
    samples = _parse_samples(args.samples)
    model = build_model(ast, max(r for r, _ in samples) * 1.01)
    po = default_order(ast)
    ind = growth.indicator_exact_expsum(model)
    cascade = growth.EpsilonCascade(args.N)
    rows = analytic.check_8l(model, ind, po, cascade, samples)
    write_csv(args.out,
              ["r", "theta", "re_zl", "predicted", "residual"],
              [(s.r, s.theta, s.re_zl, s.predicted, s.residual) for s in rows])
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="crglab",
        description="Escape-set laboratory for entire functions of "
                    "completely regular growth")
    sub = top.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--fn", required=True, help="function spec mini-language")
        p.add_argument("--N", type=int, default=1,
                       help="iterated-log depth for the epsilon cascade")

    p = sub.add_parser("indicator", help="CSV of theta, exact and empirical h")
    add_common(p)
    p.add_argument("--thetas", type=int, default=360)
    p.add_argument("--radii", required=True, help="comma-separated ladder")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_indicator)

    p = sub.add_parser("density", help="density of A or B over an annulus")
    add_common(p)
    p.add_argument("--set", choices=["A", "B"], default="A")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--beta", default="exp-power:0.5,1")
    p.add_argument("--plan", type=_parse_plan, required=True)
    p.add_argument("--disk-samples", type=int, default=16)
    p.add_argument("--exclude-disks",
                   help="disk-set text file (re im radius per line) to remove")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("check-14", help="series condition plus density margins")
    add_common(p)
    p.add_argument("--r0", type=float, required=True)
    p.add_argument("--r-list", required=True)
    p.add_argument("--m-arcs", type=int, default=2)
    p.add_argument("--tail-tol", type=float, default=1e-10)
    p.add_argument("--plan", type=_parse_plan, required=True)
    p.add_argument("--disk-samples", type=int, default=8)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_check14)

    p = sub.add_parser("escape-map", help="PGM raster of escape verdicts")
    add_common(p)
    p.add_argument("--window", type=_parse_window, required=True)
    p.add_argument("--size", default="256x256", help="WxH pixels")
    p.add_argument("--r0", type=float, required=True)
    p.add_argument("--beta", default="growth-scale")
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--bailout-log", type=float, default=500.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_escape_map)

    p = sub.add_parser("measure", help="escape density over a region")
    add_common(p)
    p.add_argument("--window", type=_parse_window)
    p.add_argument("--annulus", type=float)
    p.add_argument("--r0", type=float)
    p.add_argument("--beta", default="growth-scale")
    p.add_argument("--plan", type=_parse_plan, required=True)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--bailout-log", type=float, default=500.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_measure)

    p = sub.add_parser("verify-crg", help="CSV of measured vs predicted log|f|")
    add_common(p)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--samples", required=True, help="'r:theta;r:theta;...'")
    p.add_argument("--hypothesis-constant", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_verify_crg)

    p = sub.add_parser("covering", help="constructive covering certificates")
    p.add_argument("construction", choices=["besicovitch", "fuchs", "cartan"])
    p.add_argument("--points", help="file of 're im' lines")
    p.add_argument("--radii", help="file of radii (besicovitch)")
    p.add_argument("--zeros", help="file of 're im' zeros (cartan)")
    p.add_argument("--H", type=float, help="Fuchs-Macintyre scale")
    p.add_argument("--R", type=float, help="Cartan disk radius")
    p.add_argument("--eta", type=float, help="Cartan budget parameter")
    p.add_argument("--probes", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-disks", required=True)
    p.add_argument("--out-cert", required=True)
    p.set_defaults(func=_cmd_covering)

    p = sub.add_parser("schwarz-check", help="Schwarz reconstruction vs direct L")
    add_common(p)
    p.add_argument("--samples", required=True, help="'r:theta;...' disk centers")
    p.add_argument("--t-r", type=float, default=1.0)
    p.add_argument("--nodes", type=int, default=512)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_schwarz_check)

    p = sub.add_parser("check-8l", help="CSV of Re(zL) residuals in eps2 units")
    add_common(p)
    p.add_argument("--samples", required=True, help="'r:theta;...'")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_check_8l)

    return top


def run(argv: Sequence[str]) -> int:
    """Parse argv and execute; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        from .parallel import worker_count
        worker_count()   # validate CRG_THREADS before any computation
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except (argparse.ArgumentTypeError, ValueError) as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return 1
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    except CertificateFailure as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return 3
    except CrgLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
