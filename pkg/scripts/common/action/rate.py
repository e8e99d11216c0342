"""Minimum-action evaluation of the rate function at endpoint targets.

The action 1/2 sum |h_k|^2 dt is minimized over piecewise-constant controls
with a quadratic penalty mu dist(x^h(T), target)^2. Gradients come from the
discrete adjoint of the tamed Euler skeleton recursion, with coefficient
Jacobians taken by central differences.
"""

from collections import deque
from dataclasses import dataclass
from enum import Enum
import logging
import math

import numpy as np

from scripts.common.action.target import TargetSpec
from scripts.common.errors import BlowUpError
from scripts.common.integrate.paths import Control, TimeGrid, resample
from scripts.common.integrate.solver import check_horizon, integrate
from scripts.common.models.model import Domain, ModelSpec

log = logging.getLogger(__name__)


class Verdict(Enum):
    CONVERGED = "converged"
    NOT_CONVERGED = "not_converged"
    INFEASIBLE = "infeasible"


class StopReason(Enum):
    """Why the last penalty stage ended."""
    GTOL = "gtol"
    MAX_ITER = "max_iter"
    STALLED = "stalled"


@dataclass(frozen=True)
class OptimizerOptions:
    """Optimizer settings.

    Attributes:
        gtol: Stationarity threshold on the gradient norm.
        max_iter: Quasi-Newton iterations per penalty stage.
        memory: Stored curvature pairs.
        armijo: Sufficient-decrease constant of the backtracking search.
        ftol: A step lowering the objective by at most ftol * max(1, |f|) makes no progress.
        stall_iter: Consecutive steps improving neither the objective nor the gradient
            norm after which a stage is reported stalled.
        mu0: First penalty weight.
        mu_factor: Penalty growth per stage.
        mu_max: Last penalty weight.
        fd_step: Central-difference step for coefficient Jacobians.
        refine: Also solve on the doubled grid and extrapolate.
        restart: Allow the fallback start when the zero start does not converge.
    """
    gtol: float = 1e-8
    max_iter: int = 500
    memory: int = 10
    armijo: float = 1e-4
    ftol: float = 1e-15
    stall_iter: int = 20
    mu0: float = 1.0
    mu_factor: float = 10.0
    mu_max: float = 1e8
    fd_step: float = 1e-6
    refine: bool = False
    restart: bool = True

    def __post_init__(self):
        if self.gtol < 0 or self.ftol < 0:
            raise ValueError("Optimizer tolerances must be nonnegative")
        if self.max_iter < 1 or self.memory < 1 or self.stall_iter < 1:
            raise ValueError("max_iter, memory and stall_iter must be positive")
        if not 0 < self.armijo < 1:
            raise ValueError(f"Sufficient-decrease constant must lie in (0, 1), got {self.armijo}")
        if not (self.mu0 > 0 and self.mu_factor > 1 and self.mu_max >= self.mu0):
            raise ValueError("Penalty schedule needs mu0 > 0, mu_factor > 1 and mu_max >= mu0")
        if not self.fd_step > 0:
            raise ValueError(f"Finite-difference step must be positive, got {self.fd_step}")


@dataclass(frozen=True, eq=False)
class RateResult:
    """Outcome of one minimum-action solve.

    Attributes:
        control: Minimizing control h*.
        action: 1/2 energy of ``control``.
        terminal_error: Distance from the skeleton endpoint to the target.
        iterations: Quasi-Newton iterations over all stages.
        converged: Feasible and stationary.
        penalty_final: Penalty weight of the last stage.
        verdict: CONVERGED, NOT_CONVERGED, or INFEASIBLE (penalty cap hit while infeasible).
        grad_norm: Gradient norm of the last stage objective at ``control``.
        refinement_delta: action(2K) - action(K) when refinement was requested.
        extrapolated_action: 2 action(2K) - action(K) when refinement was requested.
        stop_reason: How the last stage ended; STALLED means float precision stopped
            progress above gtol.
    """
    control: Control
    action: float
    terminal_error: float
    iterations: int
    converged: bool
    penalty_final: float
    verdict: Verdict
    grad_norm: float
    refinement_delta: float | None = None
    extrapolated_action: float | None = None
    stop_reason: StopReason = StopReason.GTOL

    @property
    def rate(self) -> float:
        """Rate estimate; infinite when the target was found unreachable."""
        return math.inf if self.verdict is Verdict.INFEASIBLE else self.action

    def row(self) -> dict:
        return {
            "action": self.action,
            "rate": self.rate,
            "terminal_error": self.terminal_error,
            "iterations": self.iterations,
            "converged": self.converged,
            "penalty_final": self.penalty_final,
            "verdict": self.verdict.value,
            "grad_norm": self.grad_norm,
            "refinement_delta": self.refinement_delta,
            "extrapolated_action": self.extrapolated_action,
            "stop_reason": self.stop_reason.value,
        }


RATE_COLUMNS = ["action", "rate", "terminal_error", "iterations", "converged", "penalty_final",
                "verdict", "grad_norm", "refinement_delta", "extrapolated_action", "stop_reason"]


def action_functional(control: Control) -> float:
    """1/2 sum_k |h_k|^2 dt."""
    return 0.5 * control.energy


class PenaltyObjective:
    """J(h) = 1/2 sum |h_k|^2 dt + mu dist(x^h(T), target)^2 on a fixed grid."""

    def __init__(self, model: ModelSpec, grid: TimeGrid, target: TargetSpec, mu: float, fd_step: float = 1e-6):
        if target.dim != model.d:
            raise ValueError(f"Target dimension {target.dim} does not match {model.name} (d={model.d})")
        self.model = model
        self.grid = grid
        self.target = target
        self.mu = mu
        self.fd_step = fd_step
        self.shape = (grid.K, model.m)

    def states(self, values: np.ndarray) -> np.ndarray:
        """Skeleton states (K+1, d) under ``values``.

        Raises:
            BlowUpError: If the forward pass becomes non-finite.
        """
        states, blowup = integrate(self.model, self.grid, self.model.x0[None, :], values.reshape(self.shape))
        if blowup[0] >= 0:
            raise BlowUpError(int(blowup[0]))
        return states[0]

    def _energy(self, values: np.ndarray) -> float:
        return 0.5 * float(np.sum(values ** 2)) * self.grid.dt

    def value(self, values: np.ndarray) -> float:
        try:
            endpoint = self.states(values)[-1]
        except BlowUpError:
            return math.inf
        return self._energy(values) + self.mu * float(self.target.distance(endpoint)) ** 2

    def value_and_gradient(self, values: np.ndarray) -> tuple[float, np.ndarray]:
        """Objective and its gradient by one forward and one backward pass."""
        model, grid = self.model, self.grid
        h = values.reshape(self.shape)
        states = self.states(h)
        dt, d, step = grid.dt, model.d, self.fd_step
        x, t = states[:-1], grid.nodes[:-1]

        sigma = model.diffusion(t[:, None], x)
        shift = step * np.eye(d)

        def forcing(points: np.ndarray) -> np.ndarray:
            return model.tamed_drift(t[:, None, None], points, dt) + np.einsum(
                "kjil,kl->kji", model.diffusion(t[:, None, None], points), h)

        with np.errstate(all="ignore"):
            # jac[k, j, i] = d forcing_i / d x_j at step k
            jac = (forcing(x[:, None, :] + shift) - forcing(x[:, None, :] - shift)) / (2.0 * step)
        if model.domain is Domain.ORTHANT:
            pre = x + (model.tamed_drift(t[:, None], x, dt) + np.einsum("kil,kl->ki", sigma, h)) * dt
            mask = (pre >= 0.0).astype(float)
        else:
            mask = np.ones_like(x)

        endpoint = states[-1]
        lam = self.mu * self.target.distance_sq_gradient(endpoint)
        grad = dt * h.copy()
        for k in range(grid.K - 1, -1, -1):
            lam = mask[k] * lam
            grad[k] += dt * sigma[k].T @ lam
            lam = lam + dt * jac[k] @ lam
        value = self._energy(h) + self.mu * float(self.target.distance(endpoint)) ** 2
        return value, grad.reshape(values.shape)


def adjoint_gradient(model: ModelSpec, control: Control, target: TargetSpec, mu: float,
                     fd_step: float = 1e-6) -> np.ndarray:
    """Gradient (K, m) of the penalized action with respect to the control values.

    Raises:
        BlowUpError: If the forward skeleton pass becomes non-finite.
    """
    check_horizon(model, control.grid)
    objective = PenaltyObjective(model, control.grid, target, mu, fd_step)
    return objective.value_and_gradient(np.array(control.values))[1]


def _two_loop(g: np.ndarray, pairs: deque) -> np.ndarray:
    q = g.copy()
    history = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        q -= a * y
        history.append(a)
    if pairs:
        s, y, _ = pairs[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(pairs, reversed(history)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def _minimize_stage(objective: PenaltyObjective, x: np.ndarray, opts: OptimizerOptions
                    ) -> tuple[np.ndarray, float, np.ndarray, int, StopReason]:
    """Limited-memory quasi-Newton with Armijo backtracking (halving).

    Runs until the gradient norm reaches gtol or max_iter is used up. A failed
    steepest-descent line search, or stall_iter steps in a row that improve
    neither f nor |g|, end the stage as STALLED.
    """
    f, g = objective.value_and_gradient(x)
    pairs: deque = deque(maxlen=opts.memory)
    iterations, idle = 0, 0
    best_gnorm = float(np.linalg.norm(g))
    reason = StopReason.MAX_ITER
    while iterations < opts.max_iter:
        gnorm = float(np.linalg.norm(g))
        if gnorm <= opts.gtol:
            reason = StopReason.GTOL
            break
        iterations += 1
        p = _two_loop(g, pairs)
        slope = float(g @ p)
        if slope >= 0:
            pairs.clear()
            p, slope = -g, -gnorm ** 2
        step = 1.0 if pairs else min(1.0, 1.0 / gnorm)
        for _ in range(60):
            f_new = objective.value(x + step * p)
            if f_new <= f + opts.armijo * step * slope:
                break
            step *= 0.5
        else:
            if pairs:
                pairs.clear()
                continue
            reason = StopReason.STALLED
            break
        x_new = x + step * p
        f_new, g_new = objective.value_and_gradient(x_new)
        s, y = x_new - x, g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            pairs.append((s, y, 1.0 / sy))
        decrease = f - f_new
        x, f, g = x_new, f_new, g_new
        gnorm_new = float(np.linalg.norm(g))
        if decrease > opts.ftol * max(1.0, abs(f)) or gnorm_new < best_gnorm:
            idle = 0
        else:
            idle += 1
        best_gnorm = min(best_gnorm, gnorm_new)
        if idle >= opts.stall_iter:
            reason = StopReason.STALLED
            break
    else:
        if float(np.linalg.norm(g)) <= opts.gtol:
            reason = StopReason.GTOL
    return x, f, g, iterations, reason


def _solve_from(model: ModelSpec, target: TargetSpec, grid: TimeGrid, start: np.ndarray,
                opts: OptimizerOptions) -> RateResult:
    values = np.array(start, dtype=float).reshape(-1)
    mu, iterations = opts.mu0, 0
    while True:
        objective = PenaltyObjective(model, grid, target, mu, opts.fd_step)
        values, f, g, its, reason = _minimize_stage(objective, values, opts)
        iterations += its
        error = float(target.distance(objective.states(values)[-1]))
        log.debug(f"{model.name}: stage mu={mu:g} took {its} iteration(s), objective {f:.10g}, "
                  f"terminal error {error:.3e}, stopped on {reason.value}")
        if error <= target.tolerance or mu * opts.mu_factor > opts.mu_max * (1.0 + 1e-12):
            break
        mu *= opts.mu_factor

    control = Control(grid, values.reshape(grid.K, model.m))
    grad_norm = float(np.linalg.norm(g))
    feasible = error <= target.tolerance
    converged = feasible and grad_norm <= opts.gtol
    if converged:
        verdict = Verdict.CONVERGED
    elif not feasible:
        verdict = Verdict.INFEASIBLE
    else:
        verdict = Verdict.NOT_CONVERGED
    return RateResult(control, action_functional(control), error, iterations, converged, mu, verdict, grad_norm,
                      stop_reason=reason)


def _fallback_start(model: ModelSpec, target: TargetSpec, grid: TimeGrid) -> np.ndarray | None:
    """Constant control steering the linearized noiseless system straight to the target."""
    if model.m != model.d:
        return None
    sigma = model.diffusion(0.0, model.x0[None, :])[0]
    if not np.all(np.isfinite(sigma)):
        return None
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(sigma)
    if not cond < 1e12:
        return None
    slope = (target.nearest(model.x0) - model.x0) / model.T
    return np.tile(np.linalg.solve(sigma, slope), (grid.K, 1))


def _better(a: RateResult, b: RateResult, tolerance: float) -> RateResult:
    a_ok, b_ok = a.terminal_error <= tolerance, b.terminal_error <= tolerance
    if a_ok and b_ok:
        return a if a.action <= b.action else b
    if a_ok != b_ok:
        return a if a_ok else b
    return a if a.terminal_error <= b.terminal_error else b


def _attempt(model: ModelSpec, target: TargetSpec, grid: TimeGrid, start: np.ndarray,
             opts: OptimizerOptions) -> tuple[RateResult | None, BlowUpError | None]:
    try:
        return _solve_from(model, target, grid, start, opts), None
    except BlowUpError as e:
        log.debug(f"{model.name}: start abandoned, {e}")
        return None, e


def _solve(model: ModelSpec, target: TargetSpec, grid: TimeGrid, start: np.ndarray,
           opts: OptimizerOptions) -> RateResult:
    """Solves from ``start``, then from the fallback start unless already converged.

    A start whose skeleton blows up is skipped; BlowUpError is raised only when
    no start produced a result.
    """
    result, failure = _attempt(model, target, grid, start, opts)
    if (result is not None and result.converged) or not opts.restart:
        if result is None:
            raise failure
        return result
    fallback = _fallback_start(model, target, grid)
    if fallback is not None:
        log.debug(f"{model.name}: restarting from the straight-line control")
        second, failure = _attempt(model, target, grid, fallback, opts)
        if second is not None:
            result = second if result is None else _better(result, second, target.tolerance)
    if result is None:
        raise failure
    return result


def minimize_endpoint_action(model: ModelSpec, target: TargetSpec, grid: TimeGrid,
                             opts: OptimizerOptions | None = None) -> RateResult:
    """Minimum action over piecewise-constant controls reaching the target at time T.

    Starts from h = 0 with one fallback restart; with ``opts.refine`` the
    solution is re-solved on the doubled grid to report the discretization delta.
    """
    opts = opts or OptimizerOptions()
    check_horizon(model, grid)
    if target.dim != model.d:
        raise ValueError(f"Target dimension {target.dim} does not match {model.name} (d={model.d})")
    result = _solve(model, target, grid, np.zeros((grid.K, model.m)), opts)
    log.debug(f"{model.name}: action {result.action:.10g}, verdict {result.verdict.value}")
    if not opts.refine or result.verdict is Verdict.INFEASIBLE:
        return result

    fine_grid = grid.refined(2)
    fine = _solve(model, target, fine_grid, resample(result.control, fine_grid).values, opts)
    if fine.verdict is Verdict.INFEASIBLE:
        return result
    return RateResult(result.control, result.action, result.terminal_error, result.iterations + fine.iterations,
                      result.converged, result.penalty_final, result.verdict, result.grad_norm,
                      refinement_delta=fine.action - result.action,
                      extrapolated_action=2.0 * fine.action - result.action, stop_reason=result.stop_reason)
