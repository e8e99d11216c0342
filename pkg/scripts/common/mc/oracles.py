"""Closed-form reference values for the brownian and ou models."""

import math

import numpy as np
from scipy.stats import norm

from scripts.common.integrate.paths import Control, TimeGrid

# continuity correction for discretely monitored Brownian barriers
DISCRETE_BARRIER_SHIFT = 0.5826


def schilder_rate(z, x0=0.0, T: float = 1.0) -> float:
    """|z - x0|^2 / (2T)."""
    return float(np.sum((np.asarray(z, dtype=float) - x0) ** 2) / (2.0 * T))


def ou_rate(z: float, a: float = 1.0, x0: float = 0.0, T: float = 1.0) -> float:
    """Minimum action steering dx = -a x dt + h dt from x0 to z in time T."""
    gap = z - x0 * math.exp(-a * T)
    return a * gap ** 2 / (1.0 - math.exp(-2.0 * a * T))


def ou_optimal_control(grid: TimeGrid, z: float, a: float = 1.0, x0: float = 0.0) -> Control:
    """h*(t) = lambda e^{-a(T-t)} with lambda fixed by the endpoint, sampled at left nodes."""
    T = grid.T
    lam = 2.0 * a * (z - x0 * math.exp(-a * T)) / (1.0 - math.exp(-2.0 * a * T))
    return Control(grid, lam * np.exp(-a * (T - grid.nodes[:-1])))


def gaussian_log_tail(mean: float, variance: float, c: float) -> float:
    """log P(N(mean, variance) >= c)."""
    return float(norm.logsf(c, loc=mean, scale=math.sqrt(variance)))


def brownian_log_tail(epsilon: float, c: float, x0: float = 0.0, T: float = 1.0) -> float:
    """log P(x0 + sqrt(eps) B_T >= c)."""
    return gaussian_log_tail(x0, epsilon * T, c)


def ou_log_tail(epsilon: float, c: float, a: float = 1.0, x0: float = 0.0, T: float = 1.0) -> float:
    """log P(X_T >= c) for dX = -a X dt + sqrt(eps) dB, X_0 = x0."""
    mean = x0 * math.exp(-a * T)
    variance = epsilon * (1.0 - math.exp(-2.0 * a * T)) / (2.0 * a)
    return gaussian_log_tail(mean, variance, c)


def brownian_sup_tail(level: float, T: float = 1.0, dt: float = 0.0, terms: int = 50) -> float:
    """P(sup_{t<=T} |B_t| >= level) by the method of images.

    With dt > 0 the barrier is shifted outward by 0.5826 sqrt(dt), matching a
    process monitored only at grid nodes.
    """
    b = (level + DISCRETE_BARRIER_SHIFT * math.sqrt(dt)) / math.sqrt(T)
    j = np.arange(1, terms + 1)
    series = 4.0 * np.sum((-1.0) ** (j + 1) * norm.sf((2 * j - 1) * b))
    return float(min(max(series, 0.0), 1.0))


def sinusoid_distance(n: int) -> float:
    """sup_t |(1 - cos 2 pi n t) / (2 pi n)| = 1 / (pi n), valid when T >= 1/(2n)."""
    return 1.0 / (math.pi * n)
