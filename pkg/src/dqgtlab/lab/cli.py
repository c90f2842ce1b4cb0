"""Command-line entry point: ``dqgtlab {length,protocol,evolve,sweep,figure}``.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from ..dynamics import IntegrationError
from ..geometry import DivergentLengthError, PathClearanceError
from ..hamiltonians import DegenerateSpectrumError, InvalidModelError
from ..protocols import write_protocol_csv
from ..quadrature import QuadratureError
from .config import ConfigError, load_config
from .experiments import SweepFailure, build_variant, fmt, run_single, run_sweep, write_csv, write_manifest
from .figures import RECIPES, run_figure

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3

NUMERICAL_ERRORS = (IntegrationError, QuadratureError, DegenerateSpectrumError, DivergentLengthError,
                    SweepFailure, FloatingPointError, RuntimeError)
USAGE_ERRORS = (ConfigError, InvalidModelError, PathClearanceError, ValueError)


def _parser():
    p = argparse.ArgumentParser(prog="dqgtlab", description="Adiabatic-length control experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="INI config or run manifest (.json)")
        sp.add_argument("--out", help="output directory (overrides [run] out)")
        sp.add_argument("--workers", type=int, help="worker processes (overrides [run] workers)")
        sp.add_argument("--tol", type=float, help="relative tolerance (integrator and quadrature)")

    common(sub.add_parser("length", help="adiabatic length of each configured protocol path"))
    common(sub.add_parser("protocol", help="tabulate each configured protocol as CSV"))
    ev = sub.add_parser("evolve", help="trajectory CSV for every (protocol, tau)")
    common(ev)
    ev.add_argument("--protocol-file", help="use this protocol CSV (implies kind = file)")
    common(sub.add_parser("sweep", help="final transition probability over the tau list"))
    fig = sub.add_parser("figure", help=f"figure recipe: {', '.join(RECIPES)}")
    fig.add_argument("recipe")
    fig.add_argument("--quick", action="store_true", help="coarse tau grids")
    common(fig, config_required=False)
    return p


def _config(args):
    cfg = load_config(args.config)
    changes = {}
    if args.out:
        changes["out"] = args.out
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.tol is not None:
        changes["rel_tol"] = args.tol
    if getattr(args, "protocol_file", None):
        changes.update(kinds=("file",), protocol_file=args.protocol_file)
    return cfg.with_(**changes) if changes else cfg


def _length(cfg, out):
    started = time.time()
    kinds = list(cfg.kinds)
    lengths = [build_variant(cfg, k).length for k in kinds]
    for k, L in zip(kinds, lengths):
        print(f"{k},{fmt(L)}")
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "length.csv", {"kind": kinds, "length": lengths})
    write_manifest(out, cfg.to_ini(), "length", ["length.csv"], started)


def _protocol(cfg, out):
    started = time.time()
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for kind in cfg.kinds:
        name = out / f"protocol_{kind}.csv"
        write_protocol_csv(build_variant(cfg, kind).protocol, name, samples=cfg.samples)
        names.append(name.name)
        print(name)
    write_manifest(out, cfg.to_ini(), "protocol", names, started)


def dispatch(args) -> int:
    if args.command == "figure":
        if args.recipe not in RECIPES:
            raise ConfigError(f"unknown recipe {args.recipe!r}; available: {', '.join(RECIPES)}")
        written = run_figure(args.recipe, Path(args.out or "figures"), args.quick, args.workers or 1)
        print("\n".join(written))
        return EXIT_OK
    cfg = _config(args)
    out = Path(cfg.out)
    if args.command == "length":
        _length(cfg, out)
    elif args.command == "protocol":
        _protocol(cfg, out)
    elif args.command == "evolve":
        for p in run_single(cfg, out):
            print(p)
    elif args.command == "sweep":
        print(run_sweep(cfg, out))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return dispatch(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except USAGE_ERRORS as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
