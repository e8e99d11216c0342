"""Solves the controlled skeleton ODE for the configured control."""

from argparse import Namespace
import sys

from scripts import run
from scripts.common.action.rate import action_functional
from scripts.common.config.build import control_from, grid_from, model_from
from scripts.common.config.schema import RunConfig
from scripts.common.integrate.paths import path_columns, path_rows
from scripts.common.integrate.solver import solve_skeleton


def execute(config: RunConfig, args: Namespace) -> int:
    model = model_from(config)
    grid = grid_from(config, model)
    control = control_from(config, model, grid)
    path = solve_skeleton(model, control, grid)

    run.emit(config, args, ("skeleton", path_columns(model.d), path_rows(path)))
    print(f"Solved the {model.name} skeleton for a {config.control.kind} control over {grid.K} steps, "
          f"endpoint {run.vector_text(path.endpoint)}, action {action_functional(control):.6g}.")
    return run.EXIT_OK


def main(argv: list[str]) -> int:
    return run.main(argv, "skeleton", execute)


if __name__ == '__main__':
    sys.exit(main(sys.argv[1:]))
