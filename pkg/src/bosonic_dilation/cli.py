"""``bosonic`` command-line interface.

Examples::

    bosonic verify channel.json
    bosonic dilate channel.json --algorithm fixed-unitary --epsilon 0.1 --out dil.json
    bosonic simulate dil.json --state coherent:0.3,0 --cutoff 15
    bosonic sweep channel.json --algorithm var-unitary --out sweep.csv
    bosonic witness --s 1,0
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .errors import BosonicError, SpecError
from .io import dumps


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _common(suppress: bool) -> argparse.ArgumentParser:
    # Global flags are accepted before or after the subcommand; the subcommand copy
    # uses SUPPRESS so it does not overwrite a value given before it.
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=d(0))
    g.add_argument("--tol", type=float, default=d(1e-9), help="structural tolerance")
    g.add_argument("--eig-tol", type=float, default=d(1e-8), help="eigenvalue tolerance")
    g.add_argument("--cutoff", type=int, default=d(20), help="Fock cutoff per mode")
    g.add_argument("--grid-radius", type=float, default=d(None))
    g.add_argument("--grid-step", type=float, default=d(None))
    g.add_argument("--out", default=d(None), help="output file")
    g.add_argument("--json", action="store_true", default=d(False), help="print the full JSON report")
    g.add_argument("--timing", action="store_true", default=d(False), help="record runtimes in sweeps")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bosonic", parents=[_common(False)],
                                     description="Gaussian dilations of linear bosonic channels.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common(True)

    p = sub.add_parser("verify", parents=[common], help="check a channel or dilation file")
    p.add_argument("spec")

    p = sub.add_parser("dilate", parents=[common], help="synthesize a dilation")
    p.add_argument("spec")
    p.add_argument("--algorithm", choices=["exact", "var-unitary", "fixed-unitary"], default="exact")
    p.add_argument("--epsilon", type=float)

    p = sub.add_parser("simulate", parents=[common], help="apply a channel or dilation to a state")
    p.add_argument("spec")
    p.add_argument("--state", default="vacuum", help="vacuum, coherent:x,p or thermal:V")
    p.add_argument("--dump-state", help="write the output Fock state as JSON")

    p = sub.add_parser("sweep", parents=[common], help="epsilon sweep to CSV")
    p.add_argument("spec")
    p.add_argument("--algorithm", choices=["var-unitary", "fixed-unitary", "bk"])
    p.add_argument("--epsilons", type=_floats, default=harness.DEFAULT_EPSILONS)
    p.add_argument("--state", default="vacuum")
    p.add_argument("--fock", action="store_true", help="also compute Fock-level trace distances")

    p = sub.add_parser("witness", parents=[common], help="no-go witness for binary displacement")
    p.add_argument("--s", type=_floats, required=True, help="displacement vector, e.g. 1,0")
    return parser


def _config(args, epsilons=None) -> harness.RunConfig:
    kw = dict(seed=args.seed, tol=args.tol, eig_tol=args.eig_tol, cutoff=args.cutoff,
              grid_radius=args.grid_radius, grid_step=args.grid_step, timing=args.timing)
    if epsilons is not None:
        kw["epsilons"] = tuple(epsilons)
    return harness.RunConfig(**kw)


def _summary(report: dict) -> str:
    lines = [f"{report['command']}: {'PASS' if report.get('passed') else 'FAIL'}"]
    for key in ("error", "message", "label", "algorithm", "out"):
        if report.get(key):
            lines.append(f"  {key}: {report[key]}")
    checks = report.get("checks")
    if isinstance(checks, dict):
        for c in checks["checks"]:
            lines.append(f"  [{'ok' if c['passed'] else 'FAIL'}] {c['name']} = {c['value']:.3e}")
        lines.extend(f"  warning: {w}" for w in checks["warnings"])
    if "certificate" in report and report["certificate"]:
        lines.append(f"  sampled min eigenvalue: {report['certificate']['min_eig']:.3e}")
    for key in ("fock", "stinespring"):
        if key in report:
            lines.append(f"  {key}: " + ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}"
                                               for k, v in report[key].items()))
    if "csv" in report:
        lines.append(report["csv"].rstrip())
    for t in report.get("tables", []):
        lines.append(f"  eps={t['epsilon']}: max |chi_sigma(Y xi)| = {t['max_abs_chi_sigma']:.4f}")
    return "\n".join(lines)


def run(argv=None) -> tuple[int, dict | None]:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config(args, getattr(args, "epsilons", None))
        if args.command == "verify":
            code, report = harness.cmd_verify(args.spec, config)
        elif args.command == "dilate":
            code, report = harness.cmd_dilate(args.spec, args.algorithm, args.epsilon, args.out, config)
        elif args.command == "simulate":
            code, report = harness.cmd_simulate(args.spec, args.state, config, args.dump_state)
        elif args.command == "sweep":
            code, report = harness.cmd_sweep(args.spec, args.algorithm, args.state, args.out, config, args.fock)
        else:
            code, report = harness.cmd_witness(np.array(args.s), config)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, None
    except BosonicError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1, None
    if args.out and args.command in ("verify", "simulate", "witness"):
        Path(args.out).write_text(dumps(report))
    print(dumps(report) if args.json else _summary(report), end="" if args.json else "\n")
    return code, report


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    code, _ = run(argv)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
