"""Command line entry point: ``relu-landscape <subcommand> [options]``.

Exit codes: 0 when every check passed, 2 when some check failed (the report
is still written), 1 on configuration or runtime errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
import traceback

from . import __version__
from .harness import load_file, resolve, run, write_outputs

log = logging.getLogger("relu_landscape")

SUBCOMMANDS = {
    "minima-hunt": "minima_hunt",
    "conjecture": "conjecture",
    "pgd": "pgd",
    "witness": "witness",
    "probe": "probe",
    "split-certify": "split_certify",
    "spectrum": "spectrum",
}

HELP = {
    "minima-hunt": "GD fleet at n = k; dedup minima, Hessian spectra, norm-sum histogram",
    "conjecture": "curvature margins at perturbed balanced splits (Gaussian vs adversarial)",
    "pgd": "perturbed gradient descent with the step/noise/iteration recipe",
    "witness": "non-convexity, non-OPSC and non-PL witness sweeps",
    "probe": "evaluate a single landscape probe",
    "split-certify": "neuron-split saddle certificates for GD-found minima",
    "spectrum": "Hessian spectrum and H'_ii blocks at a point",
}


def _u64(text: str) -> int:
    val = int(text, 0)
    if not 0 <= val < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relu-landscape", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", help="TOML config file")
        p.add_argument("--seed", type=_u64, help="master seed (overrides the config)")
        p.add_argument("--out", default=f"out/{name}", help="output directory")
        p.add_argument("--paper-scale", action="store_true",
                       help="full-size protocol instead of desk-scale defaults")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    experiment = SUBCOMMANDS[args.command]
    try:
        cfg = resolve(experiment, load_file(args.config), args.paper_scale, args.seed)
        report, tables = run(experiment, cfg)
        path = write_outputs(args.out, report, tables)
    except Exception as exc:  # noqa: BLE001 - any failure maps to exit code 1
        log.error("%s: %s", type(exc).__name__, exc)
        if args.verbose:
            traceback.print_exc()
        return 1
    for name, ok in report["checks"].items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"report: {path}")
    return 0 if report["passed"] else 2


if __name__ == "__main__":
    sys.exit(main())
