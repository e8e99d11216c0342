"""Sampled audits of the coefficient conditions.

Points come from scrambled Sobol sequences, so a run with 2n points contains
the n points of the smaller run and the reported suprema never decrease as the
sample grows.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable
import logging
import math
import warnings

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import norm, qmc

from scripts.common.errors import EmptyRegionError, ModelConfigError, NonFiniteSampleError
from scripts.common.models.model import Domain, ModelSpec, lyapunov_lhs, trace_term
from scripts.common.models.modulus import ModulusSpec
from scripts.common.verify.report import Assumption, AuditReport

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
RATIO_TOL = 0.01
RATIO_C_MIN = 2.0 ** -10
CHUNK = 1 << 14


def sobol_points(dim: int, n: int, seed: int) -> np.ndarray:
    """First n points of a scrambled Sobol sequence in [0, 1)^dim."""
    if n < 1:
        raise ValueError(f"Need at least one sample, got {n}")
    with warnings.catch_warnings():
        # balance properties need powers of two; prefixes of any length are still nested
        warnings.simplefilter("ignore", UserWarning)
        return qmc.Sobol(d=dim, scramble=True, seed=seed).random(n)


def gaussian_directions(u: np.ndarray) -> np.ndarray:
    """Maps uniforms (n, d) to unit vectors through the Gaussian quantile."""
    z = norm.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
    r = np.linalg.norm(z, axis=-1, keepdims=True)
    fallback = np.zeros_like(z)
    fallback[:, 0] = 1.0
    return np.where(r > 0, z / np.where(r > 0, r, 1.0), fallback)


def project_ball(x: np.ndarray, R: float) -> np.ndarray:
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    return np.where(r > R, x * (R / np.where(r > 0, r, 1.0)), x)


def _fold(x: np.ndarray, domain: Domain) -> np.ndarray:
    # sign flips keep radii, so ball samples stay ball samples inside the orthant
    return np.abs(x) if domain is Domain.ORTHANT else x


def sample_region(model: ModelSpec, radius: float, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Quasi-random (s, x) with s in [0, T] and x in the domain inside ball(radius).

    Returns:
        tuple: times of shape (n,) and states of shape (n, d).
    """
    if not radius > 0:
        raise EmptyRegionError(f"Sampling region ball({radius}) is empty")
    d = model.d
    u = sobol_points(d + 2, n, seed)
    r = radius * u[:, d] ** (1.0 / d)
    x = _fold(r[:, None] * gaussian_directions(u[:, :d]), model.domain)
    return model.T * u[:, d + 1], x


def sample_pairs(model: ModelSpec, R: float, n: int, seed: int, eps0: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Quasi-random (s, x, y) with |x|, |y| <= R, |x - y| <= eps0, both in the domain."""
    if not R > 0:
        raise EmptyRegionError(f"Sampling region ball({R}) is empty")
    d = model.d
    u = sobol_points(2 * d + 2, n, seed)
    x = model.project(project_ball(R * (2.0 * u[:, :d] - 1.0), R))
    y = x + eps0 * u[:, 2 * d:2 * d + 1] * gaussian_directions(u[:, d:2 * d])
    y = model.project(project_ball(y, R))
    return model.T * u[:, 2 * d + 1], x, y


def _chunked(evaluate: Callable[[int, int], np.ndarray], n: int, threads: int) -> np.ndarray:
    bounds = [(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: evaluate(*b), bounds))
    else:
        parts = [evaluate(a, b) for a, b in bounds]
    return np.concatenate(parts)


def monotonicity_margins(model: ModelSpec, R: float, s, x, y) -> np.ndarray:
    """2<x-y, b(s,x)-b(s,y)> + |sigma(s,x)-sigma(s,y)|_HS^2 - g(s) eta_R(|x-y|^2)."""
    bundle = model.monotonicity
    if bundle is None:
        raise ModelConfigError(f"{model.name} carries no monotonicity bundle")
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    diff = x - y
    drift = 2.0 * np.einsum("...i,...i->...", diff, model.drift(s, x) - model.drift(s, y))
    hs = np.sum((model.diffusion(s, x) - model.diffusion(s, y)) ** 2, axis=(-2, -1))
    return drift + hs - bundle.g_weight(s) * bundle.eta_R(R, np.sum(diff ** 2, axis=-1))


def audit_monotonicity(model: ModelSpec, R: float, n_pairs: int, seed: int, tol: float = DEFAULT_TOL,
                       eps0: float | None = None, threads: int = 1) -> AuditReport:
    """Samples the locally weak monotonicity inequality on ball(R).

    Returns:
        AuditReport: worst_point is laid out as (s, x, y).
    """
    if model.monotonicity is None:
        raise ModelConfigError(f"{model.name} carries no monotonicity bundle")
    eps0 = model.monotonicity.eps0 if eps0 is None else eps0
    s, x, y = sample_pairs(model, R, n_pairs, seed, eps0)
    margins = _chunked(lambda a, b: monotonicity_margins(model, R, s[a:b], x[a:b], y[a:b]), n_pairs, threads)
    i = int(np.argmax(margins))
    log.debug(f"{model.name}: monotonicity over {n_pairs} pairs, R={R:g}, eps0={eps0:g}")
    return AuditReport(Assumption.MONOTONICITY, n_pairs, float(margins[i]),
                       np.concatenate([[s[i]], x[i], y[i]]), tol)


def lyapunov_margins(model: ModelSpec, s, x) -> tuple[np.ndarray, np.ndarray]:
    """LHS - f(s)(1 + gamma(V(x))), with singular points flagged and set to -inf."""
    bundle = model.lyapunov
    lhs, singular = lyapunov_lhs(model, s, x)
    rhs = bundle.f_weight(s) * (1.0 + bundle.gamma(bundle.V(np.asarray(x, dtype=float))))
    return np.where(singular, -np.inf, lhs - rhs), singular


def audit_lyapunov(model: ModelSpec, region_radius: float, n_points: int, seed: int, tol: float = DEFAULT_TOL,
                   threads: int = 1) -> tuple[AuditReport, AuditReport]:
    """Samples the Lyapunov inequality and the nonnegative-trace condition.

    Returns:
        tuple: (lyapunov report, trace report); worst points are laid out as (s, x).
    """
    if model.lyapunov is None:
        raise ModelConfigError(f"{model.name} carries no Lyapunov bundle")
    s, x = sample_region(model, region_radius, n_points, seed)

    def evaluate(a: int, b: int) -> np.ndarray:
        margins, singular = lyapunov_margins(model, s[a:b], x[a:b])
        return np.stack([margins, singular.astype(float), -trace_term(model, s[a:b], x[a:b])], axis=-1)

    table = _chunked(evaluate, n_points, threads)
    margins, singular, trace = table[:, 0], table[:, 1] > 0, table[:, 2]
    excluded = int(np.sum(singular))
    if excluded:
        log.debug(f"{model.name}: {excluded} singular point(s) excluded from the Lyapunov audit")
    i = int(np.argmax(margins))
    j = int(np.argmax(trace))
    lyapunov = AuditReport(Assumption.LYAPUNOV, n_points - excluded, float(margins[i]),
                           np.concatenate([[s[i]], x[i]]), tol, excluded=excluded)
    trace_report = AuditReport(Assumption.TRACE_NONNEG, n_points, float(trace[j]),
                               np.concatenate([[s[j]], x[j]]), tol)
    return lyapunov, trace_report


def _ratio_sup(spec: ModulusSpec, c: np.ndarray, s: np.ndarray) -> tuple[float, tuple[float, float]]:
    cs = c[:, None] * s[None, :]
    den = spec(cs)
    zero = den <= 0
    if np.any(zero):
        i, j = np.argwhere(zero)[0]
        return math.inf, (c[i], s[j])
    ratio = c[:, None] * spec(s)[None, :] / den
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    return float(ratio[i, j]), (c[i], s[j])


def audit_ratio(spec: ModulusSpec, domain_cap: float, n_c: int = 64, n_s: int = 4096,
                assumption: Assumption = Assumption.RATIO_GAMMA, tol: float = RATIO_TOL,
                c_min: float = RATIO_C_MIN, s_min: float | None = None) -> AuditReport:
    """Estimates sup c spec(s) / spec(c s) over c in [c_min, 1], s in (0, domain_cap].

    The supremum is evaluated on three nested geometric grids. The audit passes
    when it is finite and grows by at most ``tol`` (relative) per refinement;
    ``value`` holds the finest supremum and ``worst_point`` its (c, s).
    """
    if not domain_cap > 0:
        raise EmptyRegionError(f"Ratio domain (0, {domain_cap}] is empty")
    s_min = domain_cap * 1e-9 if s_min is None else s_min
    sups, point = [], (c_min, s_min)
    for level in range(3):
        scale = 2 ** level
        c = np.geomspace(c_min, 1.0, scale * (n_c - 1) + 1)
        s = np.geomspace(s_min, domain_cap, scale * (n_s - 1) + 1)
        sup, point = _ratio_sup(spec, c, s)
        sups.append(sup)
        if math.isinf(sup):
            return AuditReport(assumption, c.size * s.size, math.inf, point, tol, value=math.inf)
    growth = max((b - a) / abs(a) for a, b in zip(sups, sups[1:]))
    log.debug(f"{spec}: ratio suprema {sups}")
    return AuditReport(assumption, c.size * s.size, float(growth), point, tol, value=sups[-1])


def audit_integrability(model: ModelSpec, R: float, n_t: int = 129, n_x: int = 1024, seed: int = 0) -> float:
    """Trapezoid estimate of int_0^T sup_{|x|<=R} (|b(s,x)| + |sigma(s,x)|^2) ds.

    The supremum is taken over quasi-random interior points plus points on the
    sphere |x| = R (both endpoints +-R in one dimension).

    Raises:
        NonFiniteSampleError: If a coefficient is non-finite at a sampled point.
    """
    if not R > 0:
        raise EmptyRegionError(f"Integration region ball({R}) is empty")
    d = model.d
    u = sobol_points(d + 1, n_x, seed)
    directions = gaussian_directions(u[:, :d])
    interior = R * u[:, d:d + 1] ** (1.0 / d) * directions
    sphere = np.array([[-R], [R]]) if d == 1 else R * directions
    x = _fold(np.concatenate([interior, sphere]), model.domain)
    times = np.linspace(0.0, model.T, n_t)

    sups = np.empty(n_t)
    with np.errstate(all="ignore"):
        for k, s in enumerate(times):
            values = np.linalg.norm(model.drift(s, x), axis=-1) + np.sum(model.diffusion(s, x) ** 2, axis=(-2, -1))
            bad = ~np.isfinite(values)
            if np.any(bad):
                raise NonFiniteSampleError(float(s), x[np.argmax(bad)])
            sups[k] = np.max(values)
    return float(trapezoid(sups, times))


def integrability_report(model: ModelSpec, R: float, n_t: int = 129, n_x: int = 1024, seed: int = 0) -> AuditReport:
    try:
        value = audit_integrability(model, R, n_t, n_x, seed)
    except NonFiniteSampleError as e:
        return AuditReport(Assumption.INTEGRABILITY, n_t * n_x, math.inf, np.concatenate([[e.s], e.x]), 0.0)
    return AuditReport(Assumption.INTEGRABILITY, n_t * n_x, 0.0, [0.0], 0.0, value=value)


def osgood_integral(spec: ModulusSpec, a: float, b: float, offset: float = 0.0, nodes: int = 257) -> float:
    """int_a^b ds / (spec(s) + offset), trapezoid in log s; inf if the integrand is unbounded."""
    if not 0 < a < b:
        raise ValueError(f"Need 0 < a < b, got a={a}, b={b}")
    u = np.linspace(math.log(a), math.log(b), nodes)
    s = np.exp(u)
    values = spec(s) + offset
    if np.any(values <= 0):
        return math.inf
    return float(trapezoid(s / values, u))


def audit_osgood(spec: ModulusSpec, assumption: Assumption, anchor: float, decades: int = 8,
                 threshold: float = 0.5) -> AuditReport:
    """Decade-by-decade evidence for a divergent Osgood integral.

    OSGOOD_ETA integrates 1/spec over [anchor 10^-j-1, anchor 10^-j]; OSGOOD_GAMMA
    integrates 1/(spec + 1) over [anchor 10^j, anchor 10^j+1]. A convergent
    integral shows geometric decay of the pieces, so the audit fails when the
    last piece is smaller than ``threshold`` times the one before.
    """
    if assumption is Assumption.OSGOOD_ETA:
        limits = anchor * 10.0 ** -np.arange(decades + 1)
        pieces = [osgood_integral(spec, lo, hi) for hi, lo in zip(limits, limits[1:])]
        last = (limits[-1], limits[-2])
    elif assumption is Assumption.OSGOOD_GAMMA:
        limits = anchor * 10.0 ** np.arange(decades + 1)
        pieces = [osgood_integral(spec, lo, hi, offset=1.0) for lo, hi in zip(limits, limits[1:])]
        last = (limits[-2], limits[-1])
    else:
        raise ValueError(f"Not an Osgood audit: {assumption}")
    total = float(np.sum(pieces))
    if math.isinf(total):
        return AuditReport(assumption, len(pieces), -math.inf, last, 0.0, value=total)
    return AuditReport(assumption, len(pieces), threshold - pieces[-1] / pieces[-2], last, 0.0, value=total)


def audit_coercivity(model: ModelSpec, radii=None, n_dir: int = 1024, seed: int = 0,
                     growth: float = 1e-9) -> AuditReport:
    """Checks that min_{|x|=r} V(x) grows along increasing radii.

    worst_margin is the largest drop of the sphere minimum between consecutive
    radii; the audit passes when every step grows by at least ``growth``.
    worst_point is (r, x) at the minimizer on the sphere after the worst step.
    """
    if model.lyapunov is None:
        raise ModelConfigError(f"{model.name} carries no Lyapunov bundle")
    radii = np.geomspace(1.0, 1e3, 7) if radii is None else np.asarray(radii, dtype=float)
    directions = _fold(gaussian_directions(sobol_points(model.d, n_dir, seed)), model.domain)
    minima, argmins = [], []
    for r in radii:
        v = model.lyapunov.V(r * directions)
        minima.append(float(np.min(v)))
        argmins.append(r * directions[int(np.argmin(v))])
    drops = np.array(minima[:-1]) - np.array(minima[1:])
    k = int(np.argmax(drops))
    return AuditReport(Assumption.COERCIVITY, len(radii) * n_dir, float(drops[k]),
                       np.concatenate([[radii[k + 1]], argmins[k + 1]]), -growth, value=minima[-1])
