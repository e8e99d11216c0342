"""Monte Carlo experiments on the small-noise limit.

Samples are split into fixed batches; sample j always draws from substream j of
the run seed, so every count below is independent of batch size and of the
number of worker threads.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence
import logging
import math

import numpy as np

from scripts.common.integrate.paths import Control, TimeGrid, uniform_distance
from scripts.common.integrate.solver import check_horizon, simulate_batch, solve_skeleton
from scripts.common.mc.events import EventSpec, first_passage
from scripts.common.models.model import ModelSpec

log = logging.getLogger(__name__)

# states held per batch, in floats
BATCH_FLOATS = 1 << 21
ZERO_HIT_LEVEL = 0.05

# (epsilon, sample indices) -> per-sample control values (n, K, m)
ControlHook = Callable[[float, np.ndarray], np.ndarray]


def batch_bounds(start: int, stop: int, K: int, d: int) -> list[tuple[int, int]]:
    size = max(1, BATCH_FLOATS // ((K + 1) * d))
    return [(a, min(a + size, stop)) for a in range(start, stop, size)]


def _map_batches(work: Callable[[int, int], object], bounds: list[tuple[int, int]], threads: int) -> list:
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda b: work(*b), bounds))
    return [work(a, b) for a, b in bounds]


@dataclass(frozen=True)
class MCEstimate:
    """Hit-count estimate of P(event) at one noise level.

    Attributes:
        epsilon: Noise intensity.
        n: Simulated samples.
        hits: Samples in the event, blown-up samples excluded.
        blowups: Samples with a non-finite state.
        p_hat: hits / n.
        std_err: sqrt(p_hat (1 - p_hat) / n).
        eps_log_p: epsilon log p_hat, None when there are no hits.
        p_upper: 95% upper bound -ln(0.05) / n, set only when there are no hits.
    """
    epsilon: float
    n: int
    hits: int
    blowups: int = 0

    @property
    def p_hat(self) -> float:
        return self.hits / self.n

    @property
    def std_err(self) -> float:
        p = self.p_hat
        return math.sqrt(p * (1.0 - p) / self.n)

    @property
    def eps_log_p(self) -> float | None:
        return self.epsilon * math.log(self.p_hat) if self.hits > 0 else None

    @property
    def p_upper(self) -> float | None:
        return -math.log(ZERO_HIT_LEVEL) / self.n if self.hits == 0 else None

    @property
    def valid(self) -> bool:
        return self.blowups == 0

    def row(self) -> dict:
        return {
            "epsilon": self.epsilon, "n": self.n, "hits": self.hits, "blowups": self.blowups,
            "p_hat": self.p_hat, "std_err": self.std_err, "eps_log_p": self.eps_log_p,
            "zero_hit": self.hits == 0, "p_upper": self.p_upper,
        }


MC_COLUMNS = ["epsilon", "n", "hits", "blowups", "p_hat", "std_err", "eps_log_p", "zero_hit", "p_upper"]


def count_hits(model: ModelSpec, event: EventSpec, epsilon: float, grid: TimeGrid, seed: int,
               start: int, stop: int, threads: int = 1) -> tuple[int, int]:
    """Hits and blow-ups over samples start..stop-1."""
    check_horizon(model, grid)

    def work(a: int, b: int) -> tuple[int, int]:
        states, blowup = simulate_batch(model, epsilon, grid, seed, a, b)
        ok = blowup < 0
        return int(np.sum(event.hits(states[ok]))), int(np.sum(~ok))

    parts = _map_batches(work, batch_bounds(start, stop, grid.K, model.d), threads)
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


def estimate_rare_event(model: ModelSpec, event: EventSpec, eps_list: Sequence[float], n: int,
                        grid: TimeGrid, seed: int, threads: int = 1) -> list[MCEstimate]:
    """Estimates P(event) at every epsilon with common random numbers across epsilon."""
    if n < 1:
        raise ValueError(f"Sample count must be positive, got {n}")
    estimates = []
    for eps in eps_list:
        if not eps > 0:
            raise ValueError(f"epsilon must be positive, got {eps}")
        hits, blowups = count_hits(model, event, eps, grid, seed, 0, n, threads)
        estimates.append(MCEstimate(float(eps), n, hits, blowups))
        log.debug(f"{model.name}: eps={eps:g} {hits}/{n} hits, {blowups} blow-up(s)")
    return estimates


LDP_COLUMNS = MC_COLUMNS + ["minus_rate", "gap", "exact_eps_log_p", "exact_gap"]


def ldp_scaling_report(model: ModelSpec, event: EventSpec, eps_list: Sequence[float], n: int, grid: TimeGrid,
                       seed: int, rate_value: float, exact: Callable[[float], float] | None = None,
                       threads: int = 1) -> list[dict]:
    """Rows (epsilon, eps log p_hat, -rate, gap) with optional exact columns.

    Args:
        rate_value: inf I over the event, from the action module or an oracle.
        exact: epsilon -> exact log P(event), when known.

    Returns:
        list: One row per epsilon. Zero-hit rows leave eps_log_p and gap empty
            and carry p_upper instead.
    """
    rows = []
    for estimate in estimate_rare_event(model, event, eps_list, n, grid, seed, threads):
        row = estimate.row()
        row["minus_rate"] = -rate_value
        row["gap"] = None if estimate.eps_log_p is None else estimate.eps_log_p + rate_value
        if exact is not None:
            exact_value = estimate.epsilon * exact(estimate.epsilon)
            row["exact_eps_log_p"] = exact_value
            row["exact_gap"] = exact_value + rate_value
        rows.append(row)
    return rows


@dataclass(frozen=True, eq=False)
class PassageDiagnostics:
    """Per-sample first-passage nodes at one epsilon (-1 when never reached).

    Attributes:
        epsilon: Noise intensity.
        exit_step: First node with |Y| >= R.
        passage_step: First node with |Y - Z|^2 >= p.
        rho: Uniform distance rho(Y, Z), NaN for blown-up samples.
    """
    epsilon: float
    exit_step: np.ndarray
    passage_step: np.ndarray
    rho: np.ndarray


CONVERGENCE_COLUMNS = ["epsilon", "n", "blowups", "fraction", "mean_rho", "max_rho",
                       "exit_fraction", "passage_fraction"]


def convergence_statement_ii(model: ModelSpec, control: Control, eps_list: Sequence[float], delta: float,
                             n: int, grid: TimeGrid, seed: int, R: float = 10.0, p: float | None = None,
                             control_hook: ControlHook | None = None,
                             threads: int = 1) -> tuple[list[dict], list[PassageDiagnostics]]:
    """Measures P(rho(Y^eps, Z) > delta) for controlled paths against the skeleton Z.

    Args:
        control: Deterministic control driving both Y and Z.
        delta: Distance threshold.
        R: Exit radius for the exit-time diagnostic.
        p: Squared-distance level for the passage diagnostic, default delta^2.
        control_hook: Optional per-sample controls for Y.

    Returns:
        tuple: Table rows and per-epsilon passage diagnostics.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if n < 1:
        raise ValueError(f"Sample count must be positive, got {n}")
    p = delta ** 2 if p is None else p
    skeleton = solve_skeleton(model, control, grid).states

    rows, diagnostics = [], []
    for eps in eps_list:
        def work(a: int, b: int, eps=eps) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
            controls = control.values if control_hook is None else control_hook(eps, np.arange(a, b))
            states, blowup = simulate_batch(model, eps, grid, seed, a, b, controls)
            gap = np.linalg.norm(states - skeleton, axis=-1)
            rho = np.where(blowup < 0, np.max(gap, axis=-1), np.nan)
            exit_step = first_passage(np.linalg.norm(states, axis=-1), R)
            passage_step = first_passage(gap ** 2, p)
            return rho, exit_step, passage_step

        parts = _map_batches(work, batch_bounds(0, n, grid.K, model.d), threads)
        rho = np.concatenate([part[0] for part in parts])
        exit_step = np.concatenate([part[1] for part in parts])
        passage_step = np.concatenate([part[2] for part in parts])
        valid = ~np.isnan(rho)
        count = int(np.sum(valid))
        rows.append({
            "epsilon": float(eps),
            "n": n,
            "blowups": n - count,
            "fraction": float(np.sum(rho[valid] > delta) / count) if count else None,
            "mean_rho": float(np.mean(rho[valid])) if count else None,
            "max_rho": float(np.max(rho[valid])) if count else None,
            "exit_fraction": float(np.sum(exit_step[valid] >= 0) / count) if count else None,
            "passage_fraction": float(np.sum(passage_step[valid] >= 0) / count) if count else None,
        })
        diagnostics.append(PassageDiagnostics(float(eps), exit_step, passage_step, rho))
        log.debug(f"{model.name}: eps={eps:g} fraction {rows[-1]['fraction']}")
    return rows, diagnostics


def sinusoid_family(grid: TimeGrid, ns: Iterable[int], direction) -> dict[int, Control]:
    """h_n(t) = sin(2 pi n t) v; converges weakly to 0 as n grows."""
    return {int(k): Control.sinusoid(grid, int(k), direction) for k in ns}


WEAK_COLUMNS = ["n", "distance"]


def weak_convergence_statement_i(model: ModelSpec, control_family: Mapping[int, Control], limit: Control,
                                 grid: TimeGrid) -> list[dict]:
    """Rows (n, rho(x^{h_n}, x^{limit})) along an indexed control family."""
    reference = solve_skeleton(model, limit, grid)
    return [{"n": int(k), "distance": uniform_distance(solve_skeleton(model, h, grid), reference)}
            for k, h in control_family.items()]
