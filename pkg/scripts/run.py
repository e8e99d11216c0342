"""Front end shared by every command: flags, config loading, logging and exit codes."""

from argparse import ArgumentParser, Namespace
from typing import Callable, Sequence
import logging
import sys

import numpy as np

from scripts.common.config.schema import RunConfig, load_config
from scripts.common.errors import BlowUpError, ConfigError, FwldpError
from scripts.common.tables import Row, emit_tables

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_AUDIT_FAILED = 2
EXIT_BLOWUP = 3

Handler = Callable[[RunConfig, Namespace], int]


def handlers() -> dict[str, Handler]:
    from scripts import converge_i, converge_ii, mc_ldp, rate, simulate, skeleton, verify

    return {
        "simulate": simulate.execute,
        "skeleton": skeleton.execute,
        "rate": rate.execute,
        "verify": verify.execute,
        "mc-ldp": mc_ldp.execute,
        "converge-i": converge_i.execute,
        "converge-ii": converge_ii.execute,
    }


def build_argparser(description: str = "Run a configured experiment") -> ArgumentParser:
    parser = ArgumentParser(description=description)
    parser.add_argument('-c', '--config', type=str, required=True, help='Run configuration (*.ini)')
    parser.add_argument('-f', '--force', action='store_true', help='Overwrite existing output files')
    parser.add_argument('-t', '--threads', type=int, default=None, help='Worker threads (results do not depend on it)')
    parser.add_argument('-j', '--json', action='store_true', help='Also write JSON records')
    parser.add_argument('-s', '--seed', type=int, default=None, help='Root seed, overrides the config')
    parser.add_argument('-v', '--verbose', action='store_true', help='Print diagnostics')
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def apply_flags(config: RunConfig, args: Namespace, command: str | None = None) -> RunConfig:
    """Merges the subcommand and command-line flags into the [run] section.

    Raises:
        ConfigError: If no command is known, the subcommand contradicts the
            config, or a flag is out of range.
    """
    run = config.run
    updates = {}
    if command is not None:
        if run.command is not None and run.command != command:
            raise ConfigError(f"run.command: config asks for '{run.command}', invoked as '{command}'")
        updates["command"] = command
    elif run.command is None:
        raise ConfigError("run.command: Field required")
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError(f"--seed must be nonnegative, got {args.seed}")
        updates["seed"] = args.seed
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError(f"--threads must be positive, got {args.threads}")
        updates["threads"] = args.threads
    if args.json:
        updates["as_json"] = True
    return config.model_copy(update={"run": run.model_copy(update=updates)})


def emit(config: RunConfig, args: Namespace, *tables: tuple[str, Sequence[str], list[Row]]) -> None:
    """Writes each (name, columns, rows) table under the configured output prefix."""
    for path in emit_tables(config.run.output, list(tables), config.run.as_json, args.force):
        log.debug(f"Wrote {path}")


def vector_text(x) -> str:
    return "(" + ", ".join(f"{v:.6g}" for v in np.atleast_1d(x)) + ")"


def execute(config: RunConfig, args: Namespace, handler: Handler | None = None) -> int:
    """Runs one validated config and maps failures to exit codes."""
    handler = handler or handlers()[config.run.command]
    try:
        return handler(config, args)
    except BlowUpError as e:
        print(f"Solver blow-up: {e}", file=sys.stderr)
        return EXIT_BLOWUP
    except (FwldpError, ValueError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR


def main(argv: list[str], command: str | None = None, handler: Handler | None = None) -> int:
    parser = build_argparser(f"Run the {command} experiment" if command else "Run a configured experiment")
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        config = apply_flags(load_config(args.config), args, command)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR
    log.debug(f"Running {config.run.command} on {config.model.name}")
    return execute(config, args, handler)


if __name__ == '__main__':
    sys.exit(main(sys.argv[1:]))
