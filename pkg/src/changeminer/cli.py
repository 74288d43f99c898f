"""Command-line entry point.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from changeminer import __version__
from changeminer.miner import (
    FilterConfig,
    LayoutError,
    PipelineOptions,
    RepoNotFound,
    default_analyzers,
    run_pipeline,
    walk_files,
    walk_git,
)
from changeminer.patterns import SchemaError, bundled_patterns, load_pattern_corpus
from changeminer.report import export_json
from changeminer.treediff import DiffConfig

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("changeminer")


class ConfigError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="changeminer",
        description="Mine fine-grained AST changes and change-pattern instances from Java revisions.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--input", choices=("git", "files"), required=True)
    p.add_argument("--location", required=True, metavar="PATH")
    p.add_argument("--mode", choices=("diff", "mineinstance", "frequency", "all"), default="all")
    p.add_argument("--pattern", action="append", default=[], metavar="FILE", help="pattern XML file or directory (repeatable)")
    p.add_argument("--message-filter", action="append", default=[], metavar="KW")
    p.add_argument("--max-files-per-commit", type=int, metavar="N")
    p.add_argument("--max-hunks", type=int, metavar="N")
    p.add_argument("--file-ext", default="java", metavar="EXT")
    p.add_argument("--workers", type=int, default=1, metavar="N")
    p.add_argument("--min-height", type=int, default=DiffConfig.min_height, metavar="N")
    p.add_argument("--min-dice", type=float, default=DiffConfig.min_dice, metavar="F")
    p.add_argument("--max-recovery-size", type=int, default=DiffConfig.max_recovery_size, metavar="N")
    p.add_argument("--exact-recovery-size", type=int, default=DiffConfig.exact_recovery_size, metavar="N")
    p.add_argument("--output", default="./coming_out.json", metavar="PATH")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _run_config(args: argparse.Namespace) -> dict:
    # worker count and output path are deliberately left out: they must not change report bytes
    return {
        "input": args.input,
        "location": args.location,
        "mode": args.mode,
        "pattern": list(args.pattern),
        "message_filter": list(args.message_filter),
        "max_files_per_commit": args.max_files_per_commit,
        "max_hunks": args.max_hunks,
        "file_ext": args.file_ext,
        "min_height": args.min_height,
        "min_dice": args.min_dice,
        "max_recovery_size": args.max_recovery_size,
        "exact_recovery_size": args.exact_recovery_size,
    }


def _configure(args: argparse.Namespace):
    if args.mode == "mineinstance" and not args.pattern:
        raise ConfigError("--mode mineinstance requires at least one --pattern")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    if args.min_height < 1 or args.max_recovery_size < 0 or args.exact_recovery_size < 0 or not 0.0 <= args.min_dice <= 1.0:
        raise ConfigError("diff parameters out of range")
    try:
        filters = FilterConfig(tuple(args.message_filter), args.max_files_per_commit, args.max_hunks)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    try:
        if args.pattern:
            patterns = load_pattern_corpus(args.pattern)
        elif args.mode == "all":
            patterns = bundled_patterns()
        else:
            patterns = []
    except SchemaError as exc:
        raise ConfigError(f"bad pattern file {exc}") from None
    config = DiffConfig(args.min_height, args.min_dice, args.max_recovery_size, args.exact_recovery_size)
    return filters, patterns, config


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    try:
        filters, patterns, config = _configure(args)
        if args.input == "git":
            pairs = walk_git(args.location, filters)
        else:
            if filters != FilterConfig():
                log.warning("revision filters are ignored for --input files")
            pairs = walk_files(args.location)
        options = PipelineOptions(args.mode, args.file_ext, args.workers, _run_config(args))
        report = run_pipeline(pairs, default_analyzers(patterns, config), patterns, options)
    except (ConfigError, RepoNotFound, LayoutError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.debug("run failed", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        out = export_json(report, args.output)
    except OSError as exc:
        print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(
        f"{len(report.commits)} revision(s), {report.frequency.total_operations} operation(s), "
        f"{sum(report.pattern_totals.values())} instance(s) -> {out}"
    )
    return EXIT_OK


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
