"""Tamed Euler-Maruyama solvers for the noisy, skeleton and controlled equations.

All three share one recursion

    x_{k+1} = P( x_k + [b_tamed(t_k, x_k) + sigma(t_k, x_k) h_k] dt + sqrt(eps) sigma(t_k, x_k) dB_k )

with P the model's domain projection. The noise term is skipped entirely when
eps = 0, so the deterministic solvers agree bit for bit.
"""

import logging

import numpy as np

from scripts.common.errors import BlowUpError, GridMismatchError
from scripts.common.integrate.paths import Control, Path, PathLabel, TimeGrid, require_same_grid
from scripts.common.integrate.rng import brownian_increments
from scripts.common.models.model import ModelSpec

log = logging.getLogger(__name__)


def check_horizon(model: ModelSpec, grid: TimeGrid) -> None:
    if not np.isclose(grid.T, model.T, rtol=1e-12, atol=0.0):
        raise GridMismatchError(f"Grid horizon {grid.T} does not match {model.name} horizon {model.T}")


def integrate(model: ModelSpec, grid: TimeGrid, x_init: np.ndarray, controls: np.ndarray | None = None,
              epsilon: float = 0.0, increments: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Runs the shared recursion for a batch of n paths.

    Args:
        model: The SDE.
        grid: Time grid.
        x_init: Initial states, shape (n, d).
        controls: None, (K, m) shared by all paths, or (n, K, m).
        epsilon: Noise intensity, nonnegative.
        increments: Brownian increments (n, K, m), required when epsilon > 0.

    Returns:
        tuple: (states, blowup). ``states`` has shape (n, K+1, d); ``blowup[i]``
            is the first node of path i holding a non-finite state, or -1.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    if epsilon > 0 and increments is None:
        raise ValueError("Brownian increments are required when epsilon > 0")
    x = np.array(x_init, dtype=float)
    n, K, dt = x.shape[0], grid.K, grid.dt
    nodes = grid.nodes
    noise_scale = np.sqrt(epsilon)
    if controls is None:
        controls = np.zeros((K, model.m))

    states = np.empty((n, K + 1, model.d))
    states[:, 0] = x
    with np.errstate(all="ignore"):
        for k in range(K):
            t = nodes[k]
            sigma = model.diffusion(t, x)
            h = controls[..., k, :]
            x = x + (model.tamed_drift(t, x, dt) + np.einsum("...ij,...j->...i", sigma, h)) * dt
            if epsilon > 0:
                x = x + noise_scale * np.einsum("...ij,...j->...i", sigma, increments[:, k, :])
            x = model.project(x)
            states[:, k + 1] = x

    bad = ~np.all(np.isfinite(states), axis=-1)
    blowup = np.where(bad.any(axis=1), bad.argmax(axis=1), -1)
    return states, blowup


def simulate_batch(model: ModelSpec, epsilon: float, grid: TimeGrid, seed: int, start: int, stop: int,
                   controls: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Simulates samples start..stop-1, each on its own counter-based substream."""
    check_horizon(model, grid)
    n = stop - start
    increments = None
    if epsilon > 0:
        increments = brownian_increments(seed, start, stop, grid.K, model.m, grid.dt)
    x_init = np.broadcast_to(model.x0, (n, model.d))
    states, blowup = integrate(model, grid, x_init, controls, epsilon, increments)
    log.debug(f"{model.name}: samples {start}..{stop - 1} at eps={epsilon:g}, {int(np.sum(blowup >= 0))} blow-up(s)")
    return states, blowup


def _single(model: ModelSpec, grid: TimeGrid, states: np.ndarray, blowup: np.ndarray, label: PathLabel) -> Path:
    if blowup[0] >= 0:
        raise BlowUpError(int(blowup[0]), f"{model.name}: non-finite {label.value} state at step {int(blowup[0])}")
    return Path(grid, states[0], label)


def simulate_sde(model: ModelSpec, epsilon: float, grid: TimeGrid, seed: int, sample: int = 0) -> Path:
    """One path of the small-noise SDE.

    Raises:
        BlowUpError: If the state becomes non-finite.
    """
    states, blowup = simulate_batch(model, epsilon, grid, seed, sample, sample + 1)
    return _single(model, grid, states, blowup, PathLabel.SDE)


def solve_skeleton(model: ModelSpec, control: Control, grid: TimeGrid) -> Path:
    """The controlled noiseless path x^h."""
    require_same_grid(control.grid, grid)
    check_horizon(model, grid)
    states, blowup = integrate(model, grid, model.x0[None, :], control.values)
    return _single(model, grid, states, blowup, PathLabel.SKELETON)


def simulate_controlled(model: ModelSpec, epsilon: float, control: Control, grid: TimeGrid,
                        seed: int, sample: int = 0) -> Path:
    """One path of the controlled SDE, noise plus control drift."""
    require_same_grid(control.grid, grid)
    states, blowup = simulate_batch(model, epsilon, grid, seed, sample, sample + 1, control.values)
    return _single(model, grid, states, blowup, PathLabel.CONTROLLED)
