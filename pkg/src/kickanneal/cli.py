"""Command-line front end.

Exit codes: 0 success, 1 unexpected package error, 2 configuration,
3 theory domain, 4 normalization, 5 norm drift, 6 quadrature,
7 filesystem.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import experiment
from .exceptions import KickAnnealError
from .outputs import json_text

IO_EXIT = 7


def _print(payload: dict) -> None:
    sys.stdout.write(json_text(payload))


def _cmd_run(args) -> dict:
    cfg = experiment.load_config(args.config)
    _, summary = experiment.run(cfg, out_dir=args.out)
    return {k: summary[k] for k in ("name", "e_target", "final_energy", "final_relative_error",
                                    "t_star", "t_star_first_arrival", "csv_path", "json_path")}


def _cmd_sweep(args) -> dict:
    cfg = experiment.load_config(args.config)
    summary = experiment.sweep(cfg, out_dir=args.out, workers=args.workers)
    return {k: summary[k] for k in ("name", "theta_opt", "rows", "csv_path", "json_path")}


def _cmd_landscape(args) -> dict:
    cfg = experiment.load_config(args.config)
    summary = experiment.landscape(cfg, out_dir=args.out)
    return {k: summary[k] for k in ("name", "initial_energy", "csv_path", "json_path")}


def _cmd_theory(args) -> dict:
    cfg = experiment.load_config(args.config)
    return experiment.theory_predictions(cfg)


def _cmd_oracle(args) -> dict:
    return experiment.oracle_report(experiment.load_config(args.config))


def _cmd_validate(args) -> dict:
    return experiment.validate(args.config)


COMMANDS = {
    "run": (_cmd_run, "simulate one run and write CSV + JSON summary"),
    "sweep": (_cmd_sweep, "scan the kick angle grid and pick the empirical optimum"),
    "landscape": (_cmd_landscape, "single-kick energy scan at t=0 per axis pair"),
    "theory": (_cmd_theory, "print averaged-Hamiltonian predictions as JSON"),
    "oracle": (_cmd_oracle, "print the ground-state energy of the problem Hamiltonian"),
    "validate": (_cmd_validate, "check a config against the schema"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kickanneal", description="Kicked quantum annealing simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="path to a JSON experiment config")
        if name in ("run", "sweep", "landscape"):
            p.add_argument("--out", default=None, help="output directory (overrides output.directory)")
        if name == "sweep":
            p.add_argument("--workers", type=int, default=None, help="parallel runs (overrides sweep.workers)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command][0]
    try:
        payload = handler(args)
    except KickAnnealError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error [OSError]: {exc}", file=sys.stderr)
        return IO_EXIT
    _print(payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
