"""Turns validated config sections into models, grids, controls, targets and events."""

import numpy as np

from scripts.common.action.rate import OptimizerOptions
from scripts.common.action.target import TargetSpec
from scripts.common.config.schema import RunConfig
from scripts.common.errors import ConfigError
from scripts.common.integrate.paths import Control, TimeGrid, read_control, resample
from scripts.common.mc.events import EventSpec
from scripts.common.models.model import ModelSpec
from scripts.common.models.registry import build_model


def _vector(values, length: int, where: str) -> np.ndarray:
    if values is None:
        raise ConfigError(f"{where}: value required")
    if len(values) != length:
        raise ConfigError(f"{where}: expected {length} component(s), got {len(values)}")
    return np.asarray(values, dtype=float)


def model_from(config: RunConfig) -> ModelSpec:
    section = config.model
    return build_model(section.name, section.overrides, section.x0, section.T)


def grid_from(config: RunConfig, model: ModelSpec) -> TimeGrid:
    return TimeGrid(model.T, config.grid.K)


def control_from(config: RunConfig, model: ModelSpec, grid: TimeGrid) -> Control:
    section = config.control
    if section.kind == "zero":
        control = Control.zero(grid, model.m)
    elif section.kind == "constant":
        control = Control.constant(grid, _vector(section.value, model.m, "control.value"))
    elif section.kind == "sinusoid":
        direction = np.ones(model.m) if section.direction is None else _vector(section.direction, model.m,
                                                                               "control.direction")
        control = Control.sinusoid(grid, section.n, direction)
    else:
        if section.file is None:
            raise ConfigError("control.file: value required")
        control = read_control(section.file)
        if control.m != model.m:
            raise ConfigError(f"control.file: control has {control.m} column(s), {model.name} needs {model.m}")
        if control.grid != grid:
            control = resample(control, grid)
    if section.bound is not None:
        control = control.with_bound(section.bound)
    return control


def target_from(config: RunConfig, model: ModelSpec) -> TargetSpec:
    section = config.target
    if section.kind == "point":
        return TargetSpec.endpoint_point(_vector(section.z, model.d, "target.z"), section.tolerance)
    normal = _vector(section.a, model.d, "target.a")
    if not np.any(normal):
        raise ConfigError("target.a: normal must be nonzero")
    return TargetSpec.endpoint_halfspace(normal, section.c, section.tolerance)


def event_from(config: RunConfig, model: ModelSpec) -> EventSpec:
    section = config.event
    if section.kind == "endpoint_halfspace":
        return EventSpec.endpoint_halfspace(_vector(section.a, model.d, "event.a"), section.c)
    if section.R is None:
        raise ConfigError("event.R: value required")
    return EventSpec.exit_ball(section.R)


def options_from(config: RunConfig) -> OptimizerOptions:
    section = config.optimizer
    return OptimizerOptions(gtol=section.gtol, max_iter=section.max_iter, memory=section.memory,
                            mu_max=section.mu_max, refine=section.refine)
