"""Command-line front end.

Every subcommand writes JSON (``"schema": "1"``) unless a CSV or SVG format
is requested.  Exit status: 0 on success, 2 on invalid parameters, 1 on a
numerical failure or a failed verification.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, NoAdmissibleMu, NumericalError
from .regimes import PotentialSpec, ProblemParams, classify, decay_rate, emit_region_diagram, parse_range, region_scan
from .riesz import EnvelopeClass, RadialFunction, RieszParams, lambda_star, log_grid, radial_convolution, sigma, sigma_star

SCHEMA = "1"


class CommandFailed(Exception):
    """A well-formed command whose answer is negative; carries the payload to print."""

    def __init__(self, message: str, payload: str | None = None):
        super().__init__(message)
        self.payload = payload


def real(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return x


def span(text: str) -> tuple[float, float]:
    try:
        return parse_range(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dump(obj) -> str:
    return json.dumps({**obj, "schema": SCHEMA}, sort_keys=True, indent=2) + "\n"


def _fmt(args, allowed):
    fmt = args.format or allowed[0]
    if fmt not in allowed:
        raise DomainError(f"{args.command} supports --format {', '.join(allowed)}, got {fmt!r}")
    return fmt


def _potential(args) -> PotentialSpec:
    kind = args.potential
    if kind == "zero":
        return PotentialSpec.zero()
    if kind == "hardy":
        return PotentialSpec.hardy(_need(args, "nu"))
    return PotentialSpec(kind, lam=_need(args, "lam"), gamma=_need(args, "gamma"))


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        flag = {"lam": "--lambda"}.get(name, "--" + name.replace("_", "-"))
        raise DomainError(f"{args.command} needs {flag} here")
    return value


def _problem(args) -> ProblemParams:
    return ProblemParams(args.N, args.alpha, _need(args, "p"), _need(args, "q"), _potential(args), args.rho)


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args):
    return classify(_problem(args)).to_json() + "\n"


def cmd_decay(args):
    return _dump(decay_rate(_problem(args)).to_dict())


def cmd_regions(args):
    fmt = _fmt(args, ("svg", "csv"))
    rmap = region_scan(args.N, args.alpha, _potential(args), args.p, args.q, args.res, args.rho)
    return emit_region_diagram(rmap, fmt)


def cmd_verify(args):
    from .supersolutions import verify

    fmt = _fmt(args, ("json", "csv"))
    kw = {k: v for k, v in (("beta", args.beta), ("m", args.m), ("nu", args.shape_nu)) if v is not None}
    P = _problem(args)
    grid = log_grid(P.rho, P.rho * 10.0**args.decades, args.nodes)
    try:
        rep = verify(args.family, P, grid, **kw)
    except NoAdmissibleMu as exc:
        payload = None
        if exc.report is not None:
            payload = _dump({**exc.report.to_dict(), "admissible": False})
        raise CommandFailed(str(exc), payload) from None
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("r,residual,certified\n")
        for r, v, c in zip(rep.grid, rep.residual, rep.certified):
            buf.write(f"{r:.16e},{v:.16e},{c:.16e}\n")
        return buf.getvalue()
    return _dump({**rep.to_dict(), "admissible": True})


def cmd_minimal(args):
    from .agmon import LinearProblem, minimal_solution

    fmt = _fmt(args, ("csv", "json"))
    P = LinearProblem(args.N, _need(args, "gamma"), _need(args, "lam"), args.m, args.sigma, args.rho)
    sol = minimal_solution(P, args.r_max, nodes_per_decade=args.nodes)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("r,value\n")
        for r, v in zip(sol.profile.grid, sol.profile.values):
            buf.write(f"{r:.16e},{v:.16e}\n")
        return buf.getvalue()
    ratio = sol.normalized_ratio()
    last = sol.profile.grid >= args.r_max / 10
    return _dump({
        "problem": {"N": P.dim, "gamma": P.gamma, "lambda": P.lam, "m": P.m, "sigma": P.sigma, "rho": P.rho},
        "r_star": sol.r_star,
        "normalized_ratio_final_decade": [float(ratio[last].min()), float(ratio[last].max())],
        "tail": sol.profile.tail.to_dict(),
        "metadata": sol.metadata,
    })


def cmd_sigma(args):
    fmt = _fmt(args, ("text", "json"))
    P = RieszParams(args.N, args.alpha)
    value = float(sigma(P, args.beta)) if args.beta is not None else float(sigma_star(P))
    if fmt == "text":
        return f"{value!r}\n"
    out = {"N": P.dim, "alpha": P.alpha, "beta": args.beta, "sigma": value,
           "sigma_star": float(sigma_star(P)), "lambda_star": float(lambda_star(P))}
    return _dump(out)


def cmd_rayleigh(args):
    from .forms import TruncatedPower, best_truncated_power, rayleigh_quotient

    P = RieszParams(args.N, args.alpha)
    top = float(sigma_star(P))
    if args.best:
        ratio, phi = best_truncated_power(P)
    else:
        e = -(P.dim + P.alpha) / 2 if args.exponent is None else args.exponent
        phi = TruncatedPower(P.dim, e, args.a, args.b)
        ratio = rayleigh_quotient(phi, P)
    return _dump({"ratio": ratio, "sigma_star": top, "fraction_of_sigma_star": ratio / top,
                  "test_function": phi.to_dict()})


def cmd_gap(args):
    from .forms import TestFunction, positivity_gap

    P = _problem(args)
    phi = TestFunction(P.dim, args.a, args.b, weight=args.weight).scaled(args.scale)
    rep = positivity_gap(phi, P)
    return _dump({**rep.to_dict(), "nonexistence_certificate": bool(rep.gap < 0)})


def cmd_annulus(args):
    from .forms import annulus_bound_check

    P = _problem(args)
    if args.input is not None:
        u = RadialFunction.from_csv(args.input)
    else:
        e = _need(args, "decay")
        g = log_grid(P.rho, 4 * args.R, 32)
        u = RadialFunction(g, g**-e, tail=EnvelopeClass.power(e), inner_radius=P.rho, profile=lambda r: r**-e)
    rep = annulus_bound_check(u, P, args.R)
    return _dump({**rep.to_dict(), "bound_holds": bool(rep.gap >= 0)})


def cmd_semigroup_check(args):
    fmt = _fmt(args, ("json", "csv"))
    P = RieszParams(args.N, args.alpha)
    lo, hi = args.domain
    if not 0 < lo < hi:
        raise DomainError("domain must satisfy 0 < lo < hi")
    g = log_grid(lo, hi, args.nodes)
    b = args.beta
    tail = EnvelopeClass.power(b) if args.tail == "envelope" else None
    f = RadialFunction(g, g**-b, tail=tail)
    out = radial_convolution(f, P)
    exact = sigma(P, b) * g ** (P.alpha - b)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("r,numeric,oracle,error_bound\n")
        for r, v, x, e in zip(g, out.values, exact, out.error_bound):
            buf.write(f"{r:.16e},{v:.16e},{x:.16e},{e:.16e}\n")
        return buf.getvalue()
    rel = np.abs(out.values / exact - 1)
    mid = (g >= args.window[0]) & (g <= args.window[1])
    if not np.any(mid):
        raise DomainError("the comparison window contains no grid node")
    return _dump({
        "N": P.dim, "alpha": P.alpha, "beta": b, "sigma": float(sigma(P, b)),
        "domain": [lo, hi], "window": list(args.window), "tail": args.tail,
        "max_relative_error_window": float(rel[mid].max()),
        "max_error_bound_window": float((out.error_bound[mid] / exact[mid]).max()),
        "max_relative_error_grid": float(rel.max()),
    })


# ---------------------------------------------------------------------------
# parser


def _add_problem(sp, need_pq=True):
    sp.add_argument("--N", type=int, required=True, help="dimension")
    sp.add_argument("--alpha", type=real, required=True)
    if need_pq:
        sp.add_argument("--p", type=real)
        sp.add_argument("--q", type=real)
    _add_potential(sp)


def _add_potential(sp):
    sp.add_argument("--potential", choices=("zero", "fast", "hardy", "slow"), default="zero")
    sp.add_argument("--lambda", dest="lam", type=real)
    sp.add_argument("--gamma", type=real)
    sp.add_argument("--nu", type=real, help="Hardy parameter")
    sp.add_argument("--rho", type=real, default=1.0, help="radius of the excluded ball")


def _add_output(sp, formats):
    sp.add_argument("--format", choices=formats, default=None)
    sp.add_argument("--output", type=Path, help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="choquard", description="Existence, decay and supersolution checks "
                                 "for Choquard-type equations in exterior domains.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("classify", help="existence verdict and decay bound")
    _add_problem(sp)
    _add_output(sp, ("json",))
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("decay", help="lower decay bound of positive supersolutions")
    _add_problem(sp)
    _add_output(sp, ("json",))
    sp.set_defaults(func=cmd_decay)

    sp = sub.add_parser("regions", help="(p, q) region diagram")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--alpha", type=real, required=True)
    sp.add_argument("--p", type=span, required=True, help="lo..hi")
    sp.add_argument("--q", type=span, required=True, help="lo..hi")
    sp.add_argument("--res", type=int, default=200, help="cells per axis")
    _add_potential(sp)
    _add_output(sp, ("svg", "csv"))
    sp.set_defaults(func=cmd_regions)

    sp = sub.add_parser("verify", help="pick an amplitude for a construction and report its residual")
    _add_problem(sp)
    sp.add_argument("--family", required=True)
    sp.add_argument("--beta", type=real, help="GreenDecay exponent")
    sp.add_argument("--m", type=real, help="PowerShift or ExpMinimal parameter")
    sp.add_argument("--shape-nu", type=real, help="slow-family logarithmic parameter")
    sp.add_argument("--decades", type=real, default=4.0)
    sp.add_argument("--nodes", type=int, default=64, help="grid nodes per decade")
    _add_output(sp, ("json", "csv"))
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("minimal", help="minimal positive solution of the linear problem")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", type=real)
    sp.add_argument("--gamma", type=real)
    sp.add_argument("--m", type=real, default=0.0)
    sp.add_argument("--sigma", type=real)
    sp.add_argument("--rho", type=real, default=1.0)
    sp.add_argument("--r-max", type=real, default=1e3)
    sp.add_argument("--nodes", type=int, default=64)
    _add_output(sp, ("csv", "json"))
    sp.set_defaults(func=cmd_minimal)

    sp = sub.add_parser("sigma", help="semigroup constant, or its minimum without --beta")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--alpha", type=real, required=True)
    sp.add_argument("--beta", type=real)
    _add_output(sp, ("text", "json"))
    sp.set_defaults(func=cmd_sigma)

    sp = sub.add_parser("rayleigh", help="Rayleigh quotient of a truncated power")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--alpha", type=real, required=True)
    sp.add_argument("--exponent", type=real)
    sp.add_argument("--a", type=real, default=1.0)
    sp.add_argument("--b", type=real, default=1e3)
    sp.add_argument("--best", action="store_true", help="search exponents and ranges")
    _add_output(sp, ("json",))
    sp.set_defaults(func=cmd_rayleigh)

    sp = sub.add_parser("gap", help="positivity gap for p + q = 1")
    _add_problem(sp)
    sp.add_argument("--a", type=real, default=1.0)
    sp.add_argument("--b", type=real, default=4.0)
    sp.add_argument("--weight", type=real, default=0.0)
    sp.add_argument("--scale", type=real, default=1.0)
    _add_output(sp, ("json",))
    sp.set_defaults(func=cmd_gap)

    sp = sub.add_parser("annulus", help="annulus mass bound for a profile")
    _add_problem(sp)
    sp.add_argument("--R", type=real, required=True)
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--decay", type=real, help="use u = r^-decay")
    src.add_argument("--input", type=Path, help="profile CSV with header r,value")
    _add_output(sp, ("json",))
    sp.set_defaults(func=cmd_annulus)

    sp = sub.add_parser("semigroup-check", help="convolve a power and compare with the closed form")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--alpha", type=real, required=True)
    sp.add_argument("--beta", type=real, required=True)
    sp.add_argument("--domain", type=span, default=(1e-3, 1e5))
    sp.add_argument("--window", type=span, default=(1.0, 10.0))
    sp.add_argument("--nodes", type=int, default=64)
    sp.add_argument("--tail", choices=("envelope", "none"), default="envelope")
    _add_output(sp, ("json", "csv"))
    sp.set_defaults(func=cmd_semigroup_check)
    return ap


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _join_negative_values(argv):
    """Turn ``--q -1..3`` into ``--q=-1..3`` so argparse does not read the range as a flag."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok.startswith("--") and "=" not in tok and nxt is not None and nxt.startswith("-") and nxt[1:2].isdigit():
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        text = args.func(args)
    except CommandFailed as exc:
        if exc.payload is not None:
            _emit(exc.payload, args.output)
        print(f"choquard {args.command}: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"choquard {args.command}: invalid parameters: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"choquard {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 1
    _emit(text, args.output)
    return 0


def main(argv=None):
    sys.exit(run(argv))
