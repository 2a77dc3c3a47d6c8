"""Command-line entry point: ``bicoop run|validate|list-recipes``.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from ..montecarlo import THREADS_ENV, resolve_threads
from .config import ConfigError, load, seed_value
from .output import emit_csv, emit_plot_data
from .recipes import DEFAULT_SAMPLES, RECIPES, SCHEMAS, run_recipe

log = logging.getLogger("bicoop")


def _threads(flag: int | None) -> int:
    if flag is not None:
        return resolve_threads(flag)
    env = os.environ.get(THREADS_ENV)
    if env is None or env == "":
        return 1
    try:
        return resolve_threads(int(env))
    except ValueError as exc:
        raise ConfigError(THREADS_ENV, f"expected a non-negative integer, got {env!r}") from exc


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bicoop", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a recipe and write <out>.csv and <out>.dat")
    run.add_argument("config")
    run.add_argument("--seed", type=int)
    run.add_argument("--samples", type=int)
    run.add_argument("--out", help="output path stem (overrides output_path)")
    run.add_argument("--threads", type=int, help=f"worker threads, 0 = one per CPU "
                                                 f"(default: ${THREADS_ENV} or 1)")
    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")
    sub.add_parser("list-recipes", help="print recipe ids and summaries")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list-recipes":
        for name, r in RECIPES.items():
            print(f"{name:28s} {r.summary}")
        return 0
    try:
        cfg = load(args.config, SCHEMAS, DEFAULT_SAMPLES)
        if args.command == "validate":
            print(f"{args.config}: ok ({cfg.experiment})")
            return 0
        if args.seed is not None:
            cfg = replace(cfg, seed=seed_value("--seed", args.seed))
        if args.samples is not None:
            if args.samples < 1:
                raise ConfigError("--samples", "must be >= 1")
            cfg = replace(cfg, samples=args.samples)
        if args.threads is not None and args.threads < 0:
            raise ConfigError("--threads", "must be >= 0")
        if args.out:
            cfg = replace(cfg, output_path=args.out)
        threads = _threads(args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        table = run_recipe(cfg, threads)
        stem = Path(cfg.output_path)
        emit_csv(table, stem.with_suffix(".csv"))
        emit_plot_data(table, stem.with_suffix(".dat"))
    except Exception as exc:  # noqa: BLE001 - surfaced as runtime failure
        log.debug("run failed", exc_info=True)
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {stem.with_suffix('.csv')} and {stem.with_suffix('.dat')} "
          f"({len(table.rows)} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
