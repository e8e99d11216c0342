"""Minimum action to reach the configured endpoint target, with the minimizing control."""

from argparse import Namespace
import sys

from scripts import run
from scripts.common.action.rate import RATE_COLUMNS, RateResult, minimize_endpoint_action
from scripts.common.config.build import grid_from, model_from, options_from, target_from
from scripts.common.config.schema import RunConfig
from scripts.common.integrate.paths import control_columns, control_rows


def extrapolated_text(result: RateResult) -> str:
    if result.extrapolated_action is None:
        return "n/a"
    return f"{result.extrapolated_action:.6g} (delta {result.refinement_delta:+.3g})"


def execute(config: RunConfig, args: Namespace) -> int:
    model = model_from(config)
    grid = grid_from(config, model)
    target = target_from(config, model)
    opts = options_from(config)
    result = minimize_endpoint_action(model, target, grid, opts)

    run.emit(config, args,
             ("rate", RATE_COLUMNS, [result.row()]),
             ("rate_control", control_columns(model.m), control_rows(result.control)))
    extra = f", extrapolated {extrapolated_text(result)}" if opts.refine else ""
    print(f"Rate of {model.name} at {target}: action {result.action:.6g}{extra}, "
          f"terminal error {result.terminal_error:.2e}, {result.verdict.value} ({result.stop_reason.value}) "
          f"after {result.iterations} iterations.")
    return run.EXIT_OK


def main(argv: list[str]) -> int:
    return run.main(argv, "rate", execute)


if __name__ == '__main__':
    sys.exit(main(sys.argv[1:]))
