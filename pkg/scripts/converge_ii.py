"""Probability that controlled paths stray from their skeleton, per noise level."""

from argparse import Namespace
import sys

from scripts import run
from scripts.common.config.build import control_from, grid_from, model_from
from scripts.common.config.schema import RunConfig
from scripts.common.mc.experiments import CONVERGENCE_COLUMNS, PassageDiagnostics, convergence_statement_ii

PASSAGE_COLUMNS = ["epsilon", "sample", "rho", "exit_step", "passage_step"]


def passage_rows(diagnostics: list[PassageDiagnostics]) -> list[dict]:
    rows = []
    for item in diagnostics:
        for j, (rho, exit_step, passage_step) in enumerate(zip(item.rho, item.exit_step, item.passage_step)):
            rows.append({"epsilon": item.epsilon, "sample": j, "rho": float(rho),
                         "exit_step": int(exit_step), "passage_step": int(passage_step)})
    return rows


def execute(config: RunConfig, args: Namespace) -> int:
    model = model_from(config)
    grid = grid_from(config, model)
    control = control_from(config, model, grid)
    section = config.converge
    rows, diagnostics = convergence_statement_ii(model, control, section.eps, section.delta, section.n, grid,
                                                 config.run.seed, section.R, section.p,
                                                 threads=config.run.threads)

    run.emit(config, args,
             ("converge-ii", CONVERGENCE_COLUMNS, rows),
             ("converge-ii_passage", PASSAGE_COLUMNS, passage_rows(diagnostics)))
    fractions = ", ".join("n/a" if row["fraction"] is None else f"{row['fraction']:.3g}" for row in rows)
    print(f"Controlled {model.name} paths beyond delta={section.delta:g} of the skeleton: "
          f"fractions {fractions} at eps {', '.join(f'{e:g}' for e in section.eps)}.")
    return run.EXIT_OK


def main(argv: list[str]) -> int:
    return run.main(argv, "converge-ii", execute)


if __name__ == '__main__':
    sys.exit(main(sys.argv[1:]))
