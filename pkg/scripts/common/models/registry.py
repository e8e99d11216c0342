"""Registry of the example models.

Each entry pairs a table of named parameters (defaults and admissible ranges)
with a builder that closes the coefficients over the validated values.
"""

from dataclasses import dataclass
from typing import Callable, Mapping
import math

import numpy as np

from scripts.common.errors import ModelConfigError
from scripts.common.models.model import (
    Domain, LyapunovBundle, ModelSpec, MonotonicityBundle, constant_weight,
)
from scripts.common.models.modulus import ModulusSpec

# Below this radius the power-drift factor |x|^-alpha is held constant
POWER_DRIFT_CAP = 1e-8
DEFAULT_EPS0 = 0.5


@dataclass(frozen=True)
class Param:
    """A model parameter.

    Attributes:
        default: Value used when not overridden.
        low: Lower bound, exclusive unless ``closed_low``.
        high: Upper bound, exclusive.
        closed_low: Accept ``value == low``.
        choices: If set, the only admissible values.
    """
    default: float
    low: float | None = 0.0
    high: float | None = None
    closed_low: bool = False
    choices: tuple[float, ...] | None = None

    def check(self, model: str, name: str, value: float) -> float:
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ModelConfigError(f"{model}: parameter '{name}' must be a number, got {value!r}") from None
        if not math.isfinite(value):
            raise ModelConfigError(f"{model}: parameter '{name}' must be finite")
        if self.choices is not None:
            if value not in self.choices:
                raise ModelConfigError(f"{model}: parameter '{name}' must be one of {list(self.choices)}, got {value:g}")
            return value
        if self.low is not None and (value < self.low or (value == self.low and not self.closed_low)):
            bound = ">=" if self.closed_low else ">"
            raise ModelConfigError(f"{model}: parameter '{name}' must be {bound} {self.low:g}, got {value:g}")
        if self.high is not None and value >= self.high:
            raise ModelConfigError(f"{model}: parameter '{name}' must be < {self.high:g}, got {value:g}")
        return value


def _batch_shape(x: np.ndarray) -> tuple[int, ...]:
    return np.shape(x)[:-1]


def _norm_sq_bundle(d: int, f_value: float, delta: float = 1.0, eta: float = 1.0) -> LyapunovBundle:
    """V(x) = |x|^2 with gamma(s) = s and a constant f."""
    eye = np.eye(d)
    return LyapunovBundle(
        V=lambda x: np.sum(np.asarray(x) ** 2, axis=-1),
        V_x=lambda x: 2.0 * np.asarray(x, dtype=float),
        V_xx=lambda x: np.broadcast_to(2.0 * eye, _batch_shape(x) + (d, d)),
        delta=delta,
        eta=eta,
        f_weight=constant_weight(f_value),
        gamma=ModulusSpec.linear(1.0),
    )


def _monotonicity(eta: Callable[[float], ModulusSpec]) -> MonotonicityBundle:
    return MonotonicityBundle(eps0=DEFAULT_EPS0, g_weight=constant_weight(1.0), eta=eta)


def _holder13(p: Mapping[str, float], x0, T) -> ModelSpec:
    def drift(t, x):
        return -np.cbrt(x)

    def diffusion(t, x):
        return (np.cbrt(x) ** 2)[..., None]

    lyapunov = LyapunovBundle(
        V=lambda x: np.asarray(x)[..., 0] ** 2,
        V_x=lambda x: 2.0 * np.asarray(x, dtype=float),
        V_xx=lambda x: np.full(_batch_shape(x) + (1, 1), 2.0),
        delta=1.0,
        eta=4.0,
        f_weight=constant_weight(1.0),
        gamma=ModulusSpec.linear(1.0),
    )
    return ModelSpec("holder13", 1, 1, [1.0] if x0 is None else x0, T, drift, diffusion,
                     lyapunov=lyapunov, monotonicity=_monotonicity(ModulusSpec.xlog1overx), params=p)


def _power_drift(p: Mapping[str, float], x0, T) -> ModelSpec:
    d = 2
    alpha, sigma = p["alpha"], p["sigma"]
    floor = POWER_DRIFT_CAP

    def drift(t, x):
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        return -np.asarray(x) * np.maximum(r, floor) ** (-alpha)

    def diffusion(t, x):
        return np.zeros(_batch_shape(x) + (d, d)) + sigma * np.eye(d)

    return ModelSpec("power_drift", d, d, [1.0, 1.0] if x0 is None else x0, T, drift, diffusion,
                     lyapunov=_norm_sq_bundle(d, 1.0 + (d + 4) * sigma ** 2),
                     monotonicity=_monotonicity(ModulusSpec.xlog1overx), params=p)


def _duffing_vdp(p: Mapping[str, float], x0, T) -> ModelSpec:
    a1, a2, a3 = p["alpha1"], p["alpha2"], p["alpha3"]
    e0, e1 = p["eta0"], p["eta1"]

    def drift(t, x):
        x1, x2 = x[..., 0], x[..., 1]
        return np.stack([x2, a2 * x2 - a1 * x1 - a3 * x1 ** 2 * x2 - x1 ** 3], axis=-1)

    def diffusion(t, x):
        out = np.zeros(_batch_shape(x) + (2, 1))
        out[..., 1, 0] = np.sqrt(e0 + e1 * x[..., 0] ** 4)
        return out

    def V_xx(x):
        out = np.zeros(_batch_shape(x) + (2, 2))
        out[..., 0, 0] = 6.0 * x[..., 0] ** 2 + 2.0 * a1
        out[..., 1, 1] = 2.0
        return out

    lyapunov = LyapunovBundle(
        V=lambda x: x[..., 0] ** 4 / 2.0 + a1 * x[..., 0] ** 2 + x[..., 1] ** 2,
        V_x=lambda x: np.stack([2.0 * x[..., 0] ** 3 + 2.0 * a1 * x[..., 0], 2.0 * x[..., 1]], axis=-1),
        V_xx=V_xx,
        delta=1.0,
        eta=1.0,
        f_weight=constant_weight(5.0 * e0 + 10.0 * e1 + 2.0 * a2),
        gamma=ModulusSpec.linear(1.0),
    )

    def lipschitz(R: float) -> ModulusSpec:
        return ModulusSpec.linear(2.0 * (1.0 + a1 + a2 + (3.0 + 3.0 * a3) * R ** 2) + 4.0 * e1 * R ** 2)

    return ModelSpec("duffing_vdp", 2, 1, [0.5, 0.0] if x0 is None else x0, T, drift, diffusion,
                     lyapunov=lyapunov, monotonicity=_monotonicity(lipschitz), params=p)


def _sir(p: Mapping[str, float], x0, T) -> ModelSpec:
    alpha, beta, gamma, kappa = p["alpha"], p["beta"], p["gamma"], p["kappa"]
    couple = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]])

    def drift(t, x):
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        infection = alpha * x1 * x2
        return np.stack([-infection - kappa * x1 + kappa,
                         infection - (gamma + kappa) * x2,
                         gamma * x2 - kappa * x3], axis=-1)

    def diffusion(t, x):
        out = np.zeros(_batch_shape(x) + (3, 1))
        noise = beta * x[..., 0] * x[..., 1]
        out[..., 0, 0] = -noise
        out[..., 1, 0] = noise
        return out

    def V_x(x):
        u = x[..., 0] + x[..., 1] - 1.0
        return 2.0 * u[..., None] * np.array([1.0, 1.0, 0.0])

    lyapunov = LyapunovBundle(
        V=lambda x: (x[..., 0] + x[..., 1] - 1.0) ** 2,
        V_x=V_x,
        V_xx=lambda x: np.broadcast_to(2.0 * couple, _batch_shape(x) + (3, 3)),
        delta=1.0,
        eta=1.0,
        f_weight=constant_weight(gamma / 2.0),
        gamma=ModulusSpec.linear(1.0),
    )

    def lipschitz(R: float) -> ModulusSpec:
        return ModulusSpec.linear(2.0 * (4.0 * alpha * R + 2.0 * gamma + 3.0 * kappa) + 4.0 * beta ** 2 * R ** 2)

    return ModelSpec("sir", 3, 1, [0.9, 0.1, 0.0] if x0 is None else x0, T, drift, diffusion,
                     domain=Domain.ORTHANT, lyapunov=lyapunov, monotonicity=_monotonicity(lipschitz), params=p)


def _lv3(p: Mapping[str, float], x0, T) -> ModelSpec:
    r, sigma = p["r"], p["sigma"]
    a_ii, a_ij = p["a_ii"], p["a_ij"]
    order = int(p["correction_order"])
    A = np.full((3, 3), a_ij)
    np.fill_diagonal(A, a_ii)
    shift = 0.5 * sigma ** 2

    def drift(t, y):
        y = np.asarray(y, dtype=float)
        correction = shift * y if order == 1 else shift * y ** 2
        return y * (r - y @ A.T) + correction

    def diffusion(t, y):
        return sigma * np.asarray(y, dtype=float)[..., None]

    a_max = max(a_ii, a_ij)

    def lipschitz(R: float) -> ModulusSpec:
        return ModulusSpec.linear(2.0 * (3.0 * (r + shift) + (18.0 * a_max + 6.0 * shift) * R) + sigma ** 2)

    f_value = 2.0 * r + 2.0 * sigma ** 2 + 4.0 * sigma ** 2
    return ModelSpec("lv3", 3, 1, [0.5, 0.5, 0.5] if x0 is None else x0, T, drift, diffusion,
                     domain=Domain.ORTHANT, lyapunov=_norm_sq_bundle(3, f_value),
                     monotonicity=_monotonicity(lipschitz), params=p)


def _brownian(p: Mapping[str, float], x0, T) -> ModelSpec:
    def drift(t, x):
        return np.zeros(np.shape(x))

    def diffusion(t, x):
        return np.ones(_batch_shape(x) + (1, 1))

    return ModelSpec("brownian", 1, 1, [0.0] if x0 is None else x0, T, drift, diffusion,
                     lyapunov=_norm_sq_bundle(1, 5.0),
                     monotonicity=_monotonicity(ModulusSpec.linear), params=p)


def _ou(p: Mapping[str, float], x0, T) -> ModelSpec:
    a = p["a"]

    def drift(t, x):
        return -a * np.asarray(x, dtype=float)

    def diffusion(t, x):
        return np.ones(_batch_shape(x) + (1, 1))

    return ModelSpec("ou", 1, 1, [0.0] if x0 is None else x0, T, drift, diffusion,
                     lyapunov=_norm_sq_bundle(1, 5.0),
                     monotonicity=_monotonicity(ModulusSpec.linear), params=p)


MODELS: dict[str, tuple[Callable, dict[str, Param]]] = {
    "holder13": (_holder13, {}),
    "power_drift": (_power_drift, {
        "alpha": Param(0.5, low=0.0, high=1.0),
        "sigma": Param(0.0, closed_low=True),
    }),
    "duffing_vdp": (_duffing_vdp, {
        "alpha1": Param(1.0), "alpha2": Param(1.0), "alpha3": Param(1.0),
        "eta0": Param(1.0), "eta1": Param(1.0),
    }),
    "sir": (_sir, {
        "alpha": Param(1.0), "beta": Param(1.0), "gamma": Param(1.0), "kappa": Param(1.0),
    }),
    "lv3": (_lv3, {
        "r": Param(1.0), "sigma": Param(1.0),
        "a_ii": Param(1.0), "a_ij": Param(0.5),
        "correction_order": Param(1.0, choices=(1.0, 2.0)),
    }),
    "brownian": (_brownian, {}),
    "ou": (_ou, {"a": Param(1.0)}),
}


def available_models() -> list[str]:
    return list(MODELS.keys())


def build_model(name: str, overrides: Mapping[str, float] | None = None,
                x0=None, T: float | None = None) -> ModelSpec:
    """Builds a registered model.

    Args:
        name: Registry key.
        overrides: Parameter values replacing the defaults.
        x0: Initial state, defaults to the model's own.
        T: Horizon, defaults to 1.

    Returns:
        ModelSpec: The populated model.

    Raises:
        ModelConfigError: Unknown name or parameter, or a value out of range.
    """
    if name not in MODELS:
        raise ModelConfigError(f"Unknown model '{name}', expected one of {available_models()}")
    builder, table = MODELS[name]
    overrides = dict(overrides or {})
    unknown = sorted(set(overrides) - set(table))
    if unknown:
        raise ModelConfigError(f"{name}: unknown parameter(s) {unknown}, expected a subset of {sorted(table)}")
    params = {key: param.check(name, key, overrides.get(key, param.default)) for key, param in table.items()}
    return builder(params, x0, 1.0 if T is None else float(T))
