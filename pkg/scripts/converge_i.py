"""Skeleton distances along a weakly convergent sinusoid control family."""

from argparse import Namespace
import sys

import numpy as np

from scripts import run
from scripts.common.config.build import grid_from, model_from
from scripts.common.config.schema import RunConfig
from scripts.common.errors import ConfigError
from scripts.common.integrate.paths import Control
from scripts.common.mc.experiments import WEAK_COLUMNS, sinusoid_family, weak_convergence_statement_i
from scripts.common.mc.oracles import sinusoid_distance


def execute(config: RunConfig, args: Namespace) -> int:
    model = model_from(config)
    grid = grid_from(config, model)
    direction = config.weak.direction
    if direction is None:
        direction = np.ones(model.m)
    elif len(direction) != model.m:
        raise ConfigError(f"weak.direction: expected {model.m} component(s), got {len(direction)}")
    direction = np.asarray(direction, dtype=float)

    family = sinusoid_family(grid, config.weak.ns, direction)
    rows = weak_convergence_statement_i(model, family, Control.zero(grid, model.m), grid)
    columns = WEAK_COLUMNS
    if model.name == "brownian":
        columns = WEAK_COLUMNS + ["oracle"]
        scale = float(np.linalg.norm(direction))
        for row in rows:
            row["oracle"] = scale * sinusoid_distance(row["n"]) if grid.T >= 0.5 / row["n"] else None

    run.emit(config, args, ("converge-i", columns, rows))
    first, last = rows[0], rows[-1]
    print(f"Weak convergence on {model.name}: distance {first['distance']:.4g} at n={first['n']}, "
          f"{last['distance']:.4g} at n={last['n']}.")
    return run.EXIT_OK


def main(argv: list[str]) -> int:
    return run.main(argv, "converge-i", execute)


if __name__ == '__main__':
    sys.exit(main(sys.argv[1:]))
