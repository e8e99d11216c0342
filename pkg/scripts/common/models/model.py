from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from scripts.common.errors import ModelConfigError, SingularQuotientError
from scripts.common.models.modulus import ModulusSpec

# (t, x) -> array; x has shape (..., d) and t broadcasts against x[..., 0]
Coefficient = Callable[[np.ndarray, np.ndarray], np.ndarray]


class Domain(Enum):
    FREE = "free"
    ORTHANT = "orthant"

    def project(self, x: np.ndarray) -> np.ndarray:
        if self is Domain.ORTHANT:
            return np.maximum(x, 0.0)
        return x

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self is Domain.ORTHANT:
            return np.all(x >= 0.0, axis=-1)
        return np.ones(x.shape[:-1], dtype=bool)


def constant_weight(value: float) -> Callable[[np.ndarray], np.ndarray]:
    """Returns a time weight s -> value, vectorized over s."""
    def weight(s):
        return np.full(np.shape(s), float(value))
    weight.value = float(value)
    return weight


@dataclass(frozen=True, eq=False)
class LyapunovBundle:
    """V with its derivatives and the constants of the Lyapunov inequality.

    Attributes:
        V: x (..., d) -> (...), nonnegative.
        V_x: x (..., d) -> (..., d), gradient.
        V_xx: x (..., d) -> (..., d, d), Hessian.
        delta: Trace weight, positive.
        eta: Quotient weight, positive.
        f_weight: s -> nonnegative time weight.
        gamma: Growth modulus applied to V.
    """
    V: Callable[[np.ndarray], np.ndarray]
    V_x: Callable[[np.ndarray], np.ndarray]
    V_xx: Callable[[np.ndarray], np.ndarray]
    delta: float
    eta: float
    f_weight: Callable[[np.ndarray], np.ndarray]
    gamma: ModulusSpec

    def __post_init__(self):
        if not self.delta > 0 or not self.eta > 0:
            raise ModelConfigError(f"Lyapunov constants must be positive, got delta={self.delta}, eta={self.eta}")


@dataclass(frozen=True, eq=False)
class MonotonicityBundle:
    """Constants of the locally weak monotonicity condition.

    Attributes:
        eps0: Width of the shell |x - y| <= eps0, in (0, 1).
        g_weight: s -> nonnegative time weight.
        eta: R -> modulus eta_R.
    """
    eps0: float
    g_weight: Callable[[np.ndarray], np.ndarray]
    eta: Callable[[float], ModulusSpec]

    def __post_init__(self):
        if not 0.0 < self.eps0 < 1.0:
            raise ModelConfigError(f"eps0 must lie in (0, 1), got {self.eps0}")

    def eta_R(self, R: float, s):
        return self.eta(R)(s)


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """A named small-noise SDE dx = b(t,x)dt + sqrt(eps) sigma(t,x) dB on [0, T].

    Coefficients are vectorized: ``drift(t, x)`` maps (..., d) to (..., d) and
    ``diffusion(t, x)`` maps (..., d) to (..., d, m).
    """
    name: str
    d: int
    m: int
    x0: np.ndarray
    T: float
    drift: Coefficient
    diffusion: Coefficient
    domain: Domain = Domain.FREE
    lyapunov: LyapunovBundle | None = None
    monotonicity: MonotonicityBundle | None = None
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise ModelConfigError(f"{self.name}: dimensions must be positive, got d={self.d}, m={self.m}")
        if not (self.T > 0 and np.isfinite(self.T)):
            raise ModelConfigError(f"{self.name}: horizon T must be positive and finite, got {self.T}")
        x0 = np.array(self.x0, dtype=float).reshape(-1)
        if x0.shape != (self.d,):
            raise ModelConfigError(f"{self.name}: x0 must have length {self.d}, got {x0.shape[0]}")
        if not np.all(np.isfinite(x0)):
            raise ModelConfigError(f"{self.name}: x0 must be finite")
        if not self.domain.contains(x0):
            raise ModelConfigError(f"{self.name}: x0={x0.tolist()} lies outside the {self.domain.value} domain")
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    def tamed_drift(self, t, x: np.ndarray, dt: float) -> np.ndarray:
        """b / (1 + dt |b|), the row norm taken over the last axis."""
        b = self.drift(t, x)
        return b / (1.0 + dt * np.linalg.norm(b, axis=-1, keepdims=True))

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.domain.project(x)


def lyapunov_lhs(model: ModelSpec, t, x) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized left-hand side of the Lyapunov inequality.

    Args:
        model: Model carrying a LyapunovBundle.
        t: Times, broadcastable against x[..., 0].
        x: States, shape (..., d).

    Returns:
        tuple: (lhs, singular). ``singular`` flags points where V(x) = 0 while
            the pairing sigma^T V_x is nonzero; lhs is NaN there.
    """
    bundle = model.lyapunov
    if bundle is None:
        raise ModelConfigError(f"{model.name} carries no Lyapunov bundle")
    x = np.asarray(x, dtype=float)
    b = model.drift(t, x)
    sigma = model.diffusion(t, x)
    v = bundle.V(x)
    vx = bundle.V_x(x)
    vxx = bundle.V_xx(x)

    drift_term = np.einsum("...i,...i->...", b, vx)
    trace_term = 0.5 * bundle.delta * np.einsum("...ij,...jk,...ik->...", vxx, sigma, sigma)
    pairing = np.einsum("...ik,...i->...k", sigma, vx)
    pairing_sq = np.sum(pairing ** 2, axis=-1)

    positive = v > 0
    quotient = np.divide(pairing_sq, bundle.eta * np.where(positive, v, 1.0),
                         out=np.zeros_like(pairing_sq), where=positive)
    singular = ~positive & (pairing_sq > 0)
    lhs = np.where(singular, np.nan, drift_term + trace_term + quotient)
    return lhs, singular


def eval_lyapunov_expression(model: ModelSpec, t: float, x) -> float:
    """<b, V_x> + delta/2 trace(V_xx sigma sigma^T) + |sigma^T V_x|^2 / (eta V) at one point.

    Raises:
        SingularQuotientError: If V(x) = 0 and the diffusion pairing is nonzero.
    """
    x = np.asarray(x, dtype=float).reshape(model.d)
    lhs, singular = lyapunov_lhs(model, t, x)
    if singular:
        raise SingularQuotientError(f"{model.name}: V vanishes at x={x.tolist()} with nonzero diffusion pairing")
    return float(lhs)


def trace_term(model: ModelSpec, t, x) -> np.ndarray:
    """trace(V_xx sigma sigma^T), vectorized over x (..., d)."""
    x = np.asarray(x, dtype=float)
    sigma = model.diffusion(t, x)
    return np.einsum("...ij,...jk,...ik->...", model.lyapunov.V_xx(x), sigma, sigma)
