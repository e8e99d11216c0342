"""Simulates one tamed Euler-Maruyama sample path, optionally under a control."""

from argparse import Namespace
import sys

from scripts import run
from scripts.common.config.build import control_from, grid_from, model_from
from scripts.common.config.schema import RunConfig
from scripts.common.integrate.paths import path_columns, path_rows
from scripts.common.integrate.solver import simulate_controlled, simulate_sde


def execute(config: RunConfig, args: Namespace) -> int:
    model = model_from(config)
    grid = grid_from(config, model)
    section = config.simulate
    if section.controlled:
        control = control_from(config, model, grid)
        path = simulate_controlled(model, section.epsilon, control, grid, config.run.seed, section.sample)
    else:
        path = simulate_sde(model, section.epsilon, grid, config.run.seed, section.sample)

    run.emit(config, args, ("simulate", path_columns(model.d), path_rows(path)))
    print(f"Simulated {model.name} sample {section.sample} at eps={section.epsilon:g} over {grid.K} steps, "
          f"endpoint {run.vector_text(path.endpoint)}.")
    return run.EXIT_OK


def main(argv: list[str]) -> int:
    return run.main(argv, "simulate", execute)


if __name__ == '__main__':
    sys.exit(main(sys.argv[1:]))
