"""Monte Carlo check of the large-deviation scaling eps log P(event) -> -inf I."""

from argparse import Namespace
from typing import Callable
import logging
import math
import sys

from scripts import run
from scripts.common.action.rate import Verdict, minimize_endpoint_action
from scripts.common.config.build import event_from, grid_from, model_from, options_from
from scripts.common.config.schema import RunConfig
from scripts.common.errors import ConfigError
from scripts.common.integrate.paths import TimeGrid
from scripts.common.mc.events import EventKind, EventSpec
from scripts.common.mc.experiments import LDP_COLUMNS, ldp_scaling_report
from scripts.common.mc.oracles import brownian_log_tail, ou_log_tail, ou_rate, schilder_rate
from scripts.common.models.model import ModelSpec
from scripts.rate import extrapolated_text

log = logging.getLogger(__name__)


def _oracle_level(kind: str, model: ModelSpec, event: EventSpec) -> float:
    if kind != model.name:
        raise ConfigError(f"mc.exact: the {kind} oracle does not describe model {model.name}")
    if event.kind is not EventKind.ENDPOINT_HALFSPACE or model.d != 1 or not event.normal[0] > 0:
        raise ConfigError("mc.exact: needs a one-dimensional endpoint half-space event with a > 0")
    return event.offset / float(event.normal[0])


def exact_log_tail(kind: str | None, model: ModelSpec, event: EventSpec) -> Callable[[float], float] | None:
    """epsilon -> exact log P(event) for the brownian and ou models."""
    if kind is None:
        return None
    level = _oracle_level(kind, model, event)
    x0 = float(model.x0[0])
    if kind == "brownian":
        return lambda eps: brownian_log_tail(eps, level, x0, model.T)
    a = model.params["a"]
    return lambda eps: ou_log_tail(eps, level, a, x0, model.T)


def event_rate(config: RunConfig, model: ModelSpec, event: EventSpec, grid: TimeGrid) -> float:
    """The configured rate, else the closed form, else a minimum-action solve."""
    if config.mc.rate is not None:
        return config.mc.rate
    kind = config.mc.exact
    if kind is not None:
        level = _oracle_level(kind, model, event)
        x0 = float(model.x0[0])
        if level <= x0 * (math.exp(-model.params["a"] * model.T) if kind == "ou" else 1.0):
            return 0.0
        if kind == "brownian":
            return schilder_rate(level, x0, model.T)
        return ou_rate(level, model.params["a"], x0, model.T)
    if event.kind is not EventKind.ENDPOINT_HALFSPACE:
        raise ConfigError("mc.rate: required for exit-ball events")
    opts = options_from(config)
    result = minimize_endpoint_action(model, event.as_target(config.target.tolerance), grid, opts)
    if opts.refine:
        print(f"Rate of {model.name} for {event}: action {result.action:.6g}, "
              f"extrapolated {extrapolated_text(result)}.")
    if result.verdict is not Verdict.CONVERGED:
        log.warning(f"{model.name}: rate solve ended {result.verdict.value} ({result.stop_reason.value}), "
                    f"using action {result.action:.6g}")
    return result.rate


def execute(config: RunConfig, args: Namespace) -> int:
    model = model_from(config)
    grid = grid_from(config, model)
    event = event_from(config, model)
    rate_value = event_rate(config, model, event, grid)
    exact = exact_log_tail(config.mc.exact, model, event)
    rows = ldp_scaling_report(model, event, config.mc.eps, config.mc.n, grid, config.run.seed, rate_value,
                              exact, config.run.threads)

    run.emit(config, args, ("mc-ldp", LDP_COLUMNS, rows))
    gaps = [f"{row['gap']:+.3g}" if row["gap"] is not None else "n/a" for row in rows]
    print(f"Estimated P({event}) for {model.name} at {len(rows)} noise level(s), rate {rate_value:.6g}, "
          f"gaps {', '.join(gaps)}.")
    return run.EXIT_OK


def main(argv: list[str]) -> int:
    return run.main(argv, "mc-ldp", execute)


if __name__ == '__main__':
    sys.exit(main(sys.argv[1:]))
