"""Command-line entry point: ``gevrey {run,verify,psi,norms,cs}``."""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .bounds import lattice_sum_cs
from .errors import DiagnosticUnavailable, GevreyError
from .harness import exit_code_for, load_config, read_field, run, verify_command
from .norms import GevreyIndex, TripleNormParams, fit_analyticity_radius, gevrey_norm, sobolev_norm, triple_norm
from .xform import CriticalShift, FixedSobolev, LinearInTime, VoigtTriple, v_to_w


def _u64(text: str) -> int:
    val = int(text)
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return val


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gevrey", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="integrate a configured run and certify it")
    r.add_argument("--config", required=True, help="JSON run configuration")
    r.add_argument("--out", help="output directory (overrides the config)")
    r.add_argument("--seed", type=_u64, help="random seed (overrides the config)")
    r.add_argument("--quiet", action="store_true")

    v = sub.add_parser("verify", help="re-certify a stored series offline")
    v.add_argument("--series", required=True, help="series file written by 'run'")
    v.add_argument("--params", required=True, help="params.json written by 'run'")
    v.add_argument("--theorem", type=int, help="expected theorem id")
    v.add_argument("--out", help="directory for report.json (default: print only)")
    v.add_argument("--quiet", action="store_true")

    s = sub.add_parser("psi", help="solve for the strip width psi of a field file")
    s.add_argument("field")
    s.add_argument("--transform", required=True,
                   choices=("fixed_sobolev", "voigt_triple", "critical_shift", "linear_in_time"))
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--epsilon", type=float, default=1.0)
    s.add_argument("--s", type=float, default=0.5)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--t", type=float, default=0.0)
    s.add_argument("--quiet", action="store_true")

    n = sub.add_parser("norms", help="print a norm table for a field file")
    n.add_argument("field")
    n.add_argument("--q", type=float, nargs="+", default=[0.0, 0.5, 1.0, 1.5])
    n.add_argument("--sigma", type=float, default=0.0, help="Gevrey strip sigma")
    n.add_argument("--alpha", type=float, default=1.0)
    n.add_argument("--s", type=float, default=1.0)
    n.add_argument("--quiet", action="store_true")

    c = sub.add_parser("cs", help="print the lattice sum c_s")
    c.add_argument("s", type=float, nargs="+")
    c.add_argument("--tail-tol", type=float, default=1e-8)
    c.add_argument("--quiet", action="store_true")
    return p


def _transform(a):
    if a.transform == "fixed_sobolev":
        return FixedSobolev(a.beta, a.epsilon, a.s)
    if a.transform == "voigt_triple":
        return VoigtTriple(a.beta, a.epsilon, a.alpha, a.s)
    if a.transform == "critical_shift":
        return CriticalShift(a.beta, a.alpha)
    return LinearInTime(a.beta)


def _cmd_run(a) -> int:
    cfg = load_config(a.config, seed=a.seed, out_dir=a.out)
    code, _ = run(cfg, quiet=a.quiet)
    return code


def _cmd_verify(a) -> int:
    out = None
    if a.out:
        os.makedirs(a.out, exist_ok=True)
        out = os.path.join(a.out, "report.json")
    code, text = verify_command(a.series, a.params, out, a.theorem)
    if not a.quiet:
        sys.stdout.write(text)
    return code


def _cmd_psi(a) -> int:
    f = read_field(a.field)
    tr = v_to_w(f, _transform(a), a.t)
    print(f"psi {tr.psi:.17g}")
    print(f"residual {tr.residual:.17g}")
    print(f"iterations {tr.iterations}")
    return 0


def _cmd_norms(a) -> int:
    f = read_field(a.field)
    print(f"N {f.lattice.N}")
    for q in a.q:
        print(f"sobolev[q={q:g}] {sobolev_norm(f, q):.17g}")
        if a.sigma > 0:
            print(f"gevrey[sigma={a.sigma:g},q={q:g}] {gevrey_norm(f, GevreyIndex(a.sigma, q)):.17g}")
    print(f"triple[alpha={a.alpha:g},s={a.s:g}] {triple_norm(f, TripleNormParams(a.alpha, a.s)):.17g}")
    try:
        fit = fit_analyticity_radius(f)
        print(f"sigma_fit {fit.sigma_hat:.17g} (r2={fit.r2:.6f}, shells={fit.shells})")
    except DiagnosticUnavailable as exc:
        print(f"sigma_fit unavailable ({exc})")
    return 0


def _cmd_cs(a) -> int:
    for s in a.s:
        print(f"c_s[s={s:g}] {lattice_sum_cs(s, a.tail_tol):.17g}")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"run": _cmd_run, "verify": _cmd_verify, "psi": _cmd_psi,
               "norms": _cmd_norms, "cs": _cmd_cs}[args.command]
    try:
        return handler(args)
    except (GevreyError, OSError) as exc:
        print(f"gevrey {args.command}: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
