"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 input or parse error, 3 solver
non-convergence, 4 stability suite failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import measures
from .convex_order import check_convex_order
from .errors import CxError, MaxItersExceeded
from .extrapolation import extrapolate
from .harness import HarnessConfig, run_suite
from .ot_core import w2
from .projections import SolverConfig, backward_project, forward_project

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NONCONVERGED = 3
EXIT_SUITE_FAILED = 4


def format_sci(x: float) -> str:
    """Scientific notation with 17 significant digits, e.g. ``3.0000000000000000e0``."""
    mantissa, exponent = format(float(x), ".16e").split("e")
    return f"{mantissa}e{int(exponent)}"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cxproj", description="W2 projections in convex order.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("w2", help="2-Wasserstein distance between two measures")
    s.add_argument("a")
    s.add_argument("b")

    s = sub.add_parser("check-order", help="decide whether MU is dominated by NU")
    s.add_argument("mu")
    s.add_argument("nu")
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--certificate", metavar="OUT.json", help="write the certificate or witness")

    s = sub.add_parser("project-backward", help="closest measure to MU dominated by NU")
    s.add_argument("mu")
    s.add_argument("nu")
    s.add_argument("--out", required=True)
    s.add_argument("--fw-gap", type=float, default=1e-9)
    s.add_argument("--max-iters", type=int, default=50_000)

    s = sub.add_parser("project-forward", help="closest measure to NU dominating MU")
    s.add_argument("mu")
    s.add_argument("nu")
    s.add_argument("--out", required=True)
    s.add_argument("--t", type=float, default=2.0)

    s = sub.add_parser("extrapolate", help="metric extrapolation from NU0 through NU1")
    s.add_argument("nu0")
    s.add_argument("nu1")
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("stability-suite", help="run the randomized inequality suite")
    s.add_argument("--config", help="JSON file with HarnessConfig fields")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--workers", type=int, help="override the configured worker count")
    return p


def _load(path):
    return measures.load(path)


def _cmd_w2(args, out):
    print(format_sci(w2(_load(args.a), _load(args.b))), file=out)
    return EXIT_OK


def _cmd_check_order(args, out):
    mu, nu = _load(args.mu), _load(args.nu)
    res = check_convex_order(mu, nu, args.tol, certificate=bool(args.certificate))
    print(res.verdict, file=out)
    if args.certificate:
        if res.dominated:
            doc = res.certificate.to_dict()
        else:
            w = res.witness
            doc = {
                "schema": "convex-witness/1",
                "intercepts": w.intercepts.tolist(),
                "slopes": w.slopes.tolist(),
                "gap": w.gap,
            }
        doc["marginal"] = res.marginal
        doc["violation"] = res.violation
        Path(args.certificate).write_text(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _cmd_backward(args, out):
    mu, nu = _load(args.mu), _load(args.nu)
    cfg = SolverConfig(fw_gap_tol=args.fw_gap, max_iters=args.max_iters)
    sol = backward_project(mu, nu, cfg)
    measures.save(sol.projected, args.out)
    print(f"objective {format_sci(sol.objective)}", file=out)
    print(f"fw_gap {format_sci(sol.fw_gap)}", file=out)
    return EXIT_OK if sol.converged else EXIT_NONCONVERGED


def _cmd_forward(args, out):
    mu, nu = _load(args.mu), _load(args.nu)
    res = forward_project(mu, nu, SolverConfig(t_pipeline=args.t, strict=True))
    measures.save(res, args.out)
    print(f"distance {format_sci(w2(nu, res))}", file=out)
    return EXIT_OK


def _cmd_extrapolate(args, out):
    nu0, nu1 = _load(args.nu0), _load(args.nu1)
    res = extrapolate(nu0, nu1, args.t, SolverConfig(strict=True))
    measures.save(res, args.out)
    return EXIT_OK


def _cmd_suite(args, out):
    obj = {}
    if args.config:
        try:
            obj = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise measures.ParseError(exc.msg, line=exc.lineno) from exc
    if args.workers is not None:
        obj["workers"] = args.workers
    cfg = HarnessConfig.from_dict(obj)
    report = run_suite(cfg)
    report.write(args.out_dir)
    for cid, c in report.summary["checks"].items():
        status = "ok" if c["fail"] + c["error"] == 0 else "FAILED"
        print(f"{cid} {status} min_margin {format_sci(c['min_margin'] or 0.0)}", file=out)
    return EXIT_OK if report.passed else EXIT_SUITE_FAILED


_COMMANDS = {
    "w2": _cmd_w2,
    "check-order": _cmd_check_order,
    "project-backward": _cmd_backward,
    "project-forward": _cmd_forward,
    "extrapolate": _cmd_extrapolate,
    "stability-suite": _cmd_suite,
}


def run(argv=None, out=None, err=None) -> int:
    """Run one subcommand and return its exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _parser().parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args, out)
    except MaxItersExceeded as exc:
        print(f"not converged: {exc}", file=err)
        return EXIT_NONCONVERGED
    except (CxError, ValueError, OSError) as exc:
        print(f"input error: {exc}", file=err)
        return EXIT_INPUT


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
