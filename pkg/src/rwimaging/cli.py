"""Command-line interface.

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import load_preset, load_scenario, preset_names
from .errors import ConfigurationError, NumericalError
from .runner import run_compare, run_image, run_optimize, run_stats

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _add_common(p: argparse.ArgumentParser, multi: bool = False) -> None:
    nargs = 2 if multi else None
    p.add_argument("--config", nargs=nargs, metavar="PATH", help="scenario TOML file")
    p.add_argument("--preset", nargs=nargs, metavar="NAME", help="bundled scenario")
    p.add_argument("--out", metavar="DIR", help="output directory")


def _add_run(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="base seed (non-negative)")
    p.add_argument("--realizations", type=int, metavar="N")
    p.add_argument("--threads", type=int, default=1, metavar="N")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rwimaging", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("stats", help="coherence scales of one perturbation model"))
    for name, text in (("image", "images for the configured weightings"),
                       ("optimize", "images including optimized weights")):
        p = sub.add_parser(name, help=text)
        _add_common(p)
        _add_run(p)
    _add_common(sub.add_parser("compare", help="compare two perturbation models"), multi=True)
    preset = sub.add_parser("preset", help="bundled scenarios")
    preset.add_argument("action", choices=["list"])
    return parser


def _scenarios(args, count: int):
    if (args.config is None) == (args.preset is None):
        raise ConfigurationError("give exactly one of --config or --preset")
    if args.config is not None:
        items = args.config if count > 1 else [args.config]
        return [load_scenario(p) for p in items]
    items = args.preset if count > 1 else [args.preset]
    return [load_preset(n) for n in items]


def _dispatch(args) -> dict | None:
    if args.command == "preset":
        for name in preset_names():
            print(f"{name}\t{load_preset(name)['description']}")
        return None
    if args.command == "compare":
        first, second = _scenarios(args, 2)
        return run_compare(first, second, args.out)
    (scenario,) = _scenarios(args, 1)
    if args.command == "stats":
        result = run_stats(scenario, args.out)
        return {"rows": result["rows"], "L_equip": result["L_equip"]}
    if args.seed is not None and args.seed < 0:
        raise ConfigurationError("--seed must be non-negative")
    runner = run_image if args.command == "image" else run_optimize
    summary = runner(scenario, out=args.out, seed=args.seed,
                     realizations=args.realizations, threads=args.threads)
    return {"realizations": summary["realizations"], "weights": summary["weights"]}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = _dispatch(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if result is not None:
        print(json.dumps(result, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
