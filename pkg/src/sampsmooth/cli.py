import argparse
import json
import logging
import sys

import sampsmooth.log
from sampsmooth.config import CONFIG_SCHEMA, SUITE_HELP, SUITES, default_config, load_config
from sampsmooth.errors import EXIT_CONFIG, SampsmoothError, exit_code
from sampsmooth.runner import run
from sampsmooth.tools import Timing, parse_ladder

logger = logging.getLogger(__name__)


def list_suites():
    """text listing of the suites, their parameters and defaults"""
    lines = ["suites:"]
    for suite in SUITES:
        lines.append(f"  {suite}")
        lines.append(f"      {SUITE_HELP[suite]}")
        defaults = default_config(suite)
        kernel = ", ".join(f"{k}={v}" for k, v in defaults.kernel.items())
        lines.append(f"      defaults: kernel({kernel}) p={defaults.p:g} r={defaults.r} s={defaults.s:g}")
    lines.append("")
    lines.append("configuration schema (JSON):")
    lines.append(json.dumps(CONFIG_SCHEMA["properties"], indent=2))
    return "\n".join(lines)


def usage(argv=None):
    parser = argparse.ArgumentParser(
        prog="sampsmooth",
        description="check sampling-operator error / smoothness equivalences on test functions",
        epilog=list_suites(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    parser.add_argument(
        "-v",
        "--verbose",
        action="store",
        help="verbose",
        choices=["ERROR", "WARNING", "INFO", "DEBUG"],
        default="INFO",
    )
    parser.add_argument("--log-file", type=str, default=None, help="also log everything at DEBUG level in this file")

    commands = parser.add_subparsers(dest="command")
    commands.add_parser("list-suites", help="list suites, parameters and defaults")

    run_parser = commands.add_parser("run", help="run the suite of a JSON configuration")
    run_parser.add_argument("config", type=str, help="JSON configuration file")

    group1 = run_parser.add_argument_group("Overrides", "values replacing the ones of the configuration file")
    group1.add_argument("--out", type=str, default=None, help="folder where CSV and SVG files are written")
    group1.add_argument("--seed", type=int, default=None, help="seed of random grids, coefficients and zoo members")
    group1.add_argument(
        "--ladder",
        type=str,
        default=None,
        help="dyadic sigma ladder 'low:high', both ends included, for example 8:256",
    )
    group1.add_argument(
        "-j",
        "--jobs",
        type=int,
        default=None,
        help="number of dask worker processes; 1 runs every rung inline",
    )

    return parser.parse_args(argv)


def app(argv=None):
    args = usage(argv)
    sampsmooth.log.create_logger(level=args.verbose, filename=args.log_file)

    if args.command in (None, "list-suites"):
        print(list_suites())
        return 0

    try:
        ladder = None if args.ladder is None else parse_ladder(args.ladder)
    except ValueError as err:
        logger.error(f"--ladder: {err}")
        return EXIT_CONFIG

    with Timing("s") as dt:
        try:
            config = load_config(args.config, out=args.out, seed=args.seed, ladder=ladder, jobs=args.jobs)
            status = run(config)
        except SampsmoothError as err:
            status = exit_code(err)
            logger.error(f"{type(err).__name__}: {err}")
    logger.info(f"total time for sampsmooth : {dt} (exit status {status})")
    return status


if __name__ == "__main__":
    sys.exit(app())
