"""Multinomial sampling, maximum-likelihood phase estimation and bootstrap error bars.

Randomness is keyed, never shared: every draw comes from a fresh
``numpy.random.Generator`` seeded with a tuple such as ``(seed, 1, run, b)``.
A task therefore produces the same numbers whether it runs first, last, or
on another thread.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import optimize

from .errors import InfeasibleCountsError, NumericalError, SpecError
from .fisher import cfim_batch, weighted_variance

SeedLike = Union[int, Sequence[int]]

GRID_POINTS = 1000
GOLDEN_TOL = 1e-8
EDGE = 1e-3
MAX_FAILURE_RATE = 0.01
_INV_PHI = (math.sqrt(5) - 1) / 2


def rng_for(*keys) -> np.random.Generator:
    """Independent generator for a tuple of non-negative integer keys."""
    flat = []
    for k in keys:
        flat.extend(k if isinstance(k, (tuple, list)) else [k])
    return np.random.default_rng([int(k) for k in flat])


@dataclass(frozen=True)
class CountRecord:
    counts: np.ndarray
    trials: int
    seed: Optional[tuple] = None

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 1 or np.any(c < 0):
            raise SpecError("counts must be a non-negative integer vector")
        if int(c.sum()) != self.trials:
            raise SpecError(f"counts sum to {c.sum()}, expected {self.trials} trials")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.trials


def sample_counts(dist, mu: int, seed: SeedLike) -> CountRecord:
    """Multinomial draw of ``mu`` detection events from ``dist``."""
    if mu < 1:
        raise SpecError(f"need at least one trial, got {mu}")
    p = np.asarray(getattr(dist, "probabilities", dist), dtype=float)
    p = p / p.sum()
    counts = rng_for(seed).multinomial(mu, p)
    key = tuple(seed) if isinstance(seed, (tuple, list)) else (int(seed),)
    return CountRecord(counts, mu, key)


def _scan_fn(model) -> Callable:
    return getattr(model, "along_scan", model)


def default_domain(model) -> tuple:
    """Identifiable interval (0, pi/N) less a small edge margin."""
    N = getattr(model, "N", 2)
    return EDGE, math.pi / N - EDGE


def _check_domain(domain, model) -> tuple:
    lo, hi = (float(x) for x in domain)
    N = getattr(model, "N", 2)
    if not 0 < lo < hi < math.pi / N:
        raise SpecError(f"search domain must lie inside (0, pi/{N}), got ({lo}, {hi})")
    return lo, hi


def _loglik(counts: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Row-wise sum_l counts_l log P_l; -inf where a counted outcome has P = 0."""
    positive = P > 0
    logp = np.log(np.where(positive, P, 1.0))
    ll = np.einsum("...l,...l->...", counts, logp)
    infeasible = np.einsum("...l,...l->...", (counts > 0).astype(float), (~positive).astype(float)) > 0
    return np.where(infeasible, -np.inf, ll)


def mle_batch(counts, model, domain=None, grid_points: int = GRID_POINTS,
              tol: float = GOLDEN_TOL) -> tuple:
    """Scalar MLE on the scan line for every row of ``counts``.

    Dense grid search followed by golden-section refinement of the bracketing
    grid cell. Returns ``(phi_est, loglik)``; infeasible rows come back as NaN
    and ``-inf``.
    """
    if grid_points < 3:
        raise SpecError("grid search needs at least 3 points")
    counts = np.atleast_2d(np.asarray(counts, dtype=float))
    f = _scan_fn(model)
    lo, hi = _check_domain(domain if domain is not None else default_domain(model), model)
    grid = np.linspace(lo, hi, grid_points)
    ll_grid = _loglik(counts[:, None, :], f(grid)[None, :, :])
    best = np.argmax(ll_grid, axis=1)
    best_ll = ll_grid[np.arange(len(counts)), best]
    feasible = np.isfinite(best_ll)

    a = grid[np.maximum(best - 1, 0)]
    b = grid[np.minimum(best + 1, grid_points - 1)]

    def fval(x):
        return _loglik(counts, f(x))

    c = b - _INV_PHI * (b - a)
    e = a + _INV_PHI * (b - a)
    fc, fe = fval(c), fval(e)
    while np.max(b - a) > tol:
        left = fc > fe  # maximum lies in [a, e]
        b = np.where(left, e, b)
        a = np.where(left, a, c)
        new_c = np.where(left, b - _INV_PHI * (b - a), e)
        new_e = np.where(left, c, a + _INV_PHI * (b - a))
        x_new = np.where(left, new_c, new_e)
        f_new = fval(x_new)
        fc, fe = np.where(left, f_new, fe), np.where(left, fc, f_new)
        c, e = new_c, new_e
    phi = (a + b) / 2
    ll = fval(phi)
    # keep the grid point if refinement wandered into a worse region
    worse = ll < best_ll
    phi = np.where(worse, grid[best], phi)
    ll = np.where(worse, best_ll, ll)
    phi = np.where(feasible, phi, np.nan)
    ll = np.where(feasible, ll, -np.inf)
    return phi, ll


@dataclass
class EstimationRun:
    phi_est: float
    log_likelihood: float
    domain: tuple
    trials: int
    bootstrap_std: Optional[float] = None
    resamples: int = 0
    node_estimates: Optional[list] = None
    seed: Optional[tuple] = None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def mle_estimate(counts: CountRecord, model, domain=None, grid_points: int = GRID_POINTS,
                 tol: float = GOLDEN_TOL) -> EstimationRun:
    """Maximize sum_l counts_l log P_l(phi) with phi_1 = ... = phi_d = phi."""
    dom = _check_domain(domain if domain is not None else default_domain(model), model)
    phi, ll = mle_batch(counts.counts, model, dom, grid_points, tol)
    if not np.isfinite(phi[0]):
        raise InfeasibleCountsError(
            "observed counts have zero likelihood everywhere on the search domain")
    return EstimationRun(float(phi[0]), float(ll[0]), dom, counts.trials, seed=counts.seed)


def mle_estimate_joint(counts: CountRecord, model, domain=None, nu: Optional[Sequence[float]] = None
                       ) -> EstimationRun:
    """Joint MLE of all node phases, reported as the weighted global phase.

    Cross-check for :func:`mle_estimate`: starts from the scalar estimate and
    maximizes the full likelihood over the box ``domain ** d``.
    """
    scalar = mle_estimate(counts, model, domain)
    d = model.d
    nu = np.full(d, 1.0 / d) if nu is None else np.asarray(nu, dtype=float)
    c = counts.counts.astype(float)

    def nll(x):
        v = _loglik(c, model.probabilities(x))
        return -v if np.isfinite(v) else 1e300

    res = optimize.minimize(nll, np.full(d, scalar.phi_est), method="L-BFGS-B",
                            bounds=[scalar.domain] * d, options={"ftol": 1e-15, "gtol": 1e-10})
    x = res.x if -res.fun >= scalar.log_likelihood else np.full(d, scalar.phi_est)
    return EstimationRun(float(nu @ x), float(-nll(x)), scalar.domain, counts.trials,
                         node_estimates=x.tolist(), seed=counts.seed)


def _resample(counts: CountRecord, seed: SeedLike, B: int, probs: np.ndarray) -> np.ndarray:
    return np.stack([rng_for(seed, b).multinomial(counts.trials, probs) for b in range(B)])


def bootstrap_estimates(counts: CountRecord, model, domain=None, B: int = 500,
                        seed: SeedLike = 0, parametric: bool = False) -> np.ndarray:
    """MLE of ``B`` resampled count records (NaN where a resample failed).

    Nonparametric resampling draws from the empirical frequencies; with
    ``parametric`` the fitted model distribution is used instead.
    """
    if B < 1:
        raise SpecError("need at least one bootstrap resample")
    dom = domain if domain is not None else default_domain(model)
    if parametric:
        fit = mle_estimate(counts, model, dom)
        probs = np.asarray(_scan_fn(model)(fit.phi_est), dtype=float)
        probs = probs / probs.sum()
    else:
        probs = counts.frequencies
    phi, _ = mle_batch(_resample(counts, seed, B, probs), model, dom)
    return phi


def bootstrap_std(counts: CountRecord, model, domain=None, B: int = 500, seed: SeedLike = 0,
                  parametric: bool = False) -> float:
    """Sample standard deviation of the bootstrap MLE estimates."""
    if B < 100:
        raise SpecError(f"bootstrap needs B >= 100 resamples, got {B}")
    est = bootstrap_estimates(counts, model, domain, B, seed, parametric)
    failed = int(np.isnan(est).sum())
    if failed > MAX_FAILURE_RATE * B:
        raise NumericalError(f"{failed} of {B} bootstrap resamples failed the MLE")
    return float(np.std(est[~np.isnan(est)], ddof=1))


def crb_std(model, phi: float, mu: int, nu: Optional[Sequence[float]] = None, h: float = 1e-4) -> float:
    """sqrt(nu^T F_C^-1 nu / mu) at the scan point phi_1 = ... = phi_d = phi."""
    d = model.d
    nu = np.full(d, 1.0 / d) if nu is None else nu
    F = cfim_batch(model.probabilities, np.full((1, d), phi), h)[0]
    return math.sqrt(weighted_variance(F, nu) / mu)


def _map(fn, items, threads: int) -> list:
    if threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=None if threads == 0 else threads) as pool:
        return list(pool.map(fn, items))


@dataclass
class MonteCarloSummary:
    phi_true: float
    mu: int
    runs: int
    estimates: np.ndarray
    mean: float
    std: float
    stderr: float
    crb_std: float
    bootstrap_stds: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["estimates"] = self.estimates.tolist()
        if self.bootstrap_stds is not None:
            out["bootstrap_stds"] = self.bootstrap_stds.tolist()
        return out


def monte_carlo(model, phi_true: float, mu: int, runs: int, seed: int, B: int = 0,
                domain=None, threads: int = 1) -> MonteCarloSummary:
    """Repeat sampling + MLE ``runs`` times; optionally bootstrap every run.

    Run ``i`` samples with keys ``(seed, 0, i)`` and bootstraps with ``(seed, 1, i, b)``.
    """
    dom = domain if domain is not None else default_domain(model)
    p = np.asarray(_scan_fn(model)(phi_true), dtype=float)
    records = [sample_counts(p, mu, (seed, 0, i)) for i in range(runs)]
    est, _ = mle_batch(np.stack([r.counts for r in records]), model, dom)
    if np.isnan(est).any():
        raise InfeasibleCountsError(f"{int(np.isnan(est).sum())} Monte-Carlo runs had infeasible counts")
    boots = None
    if B:
        boots = np.array(_map(lambda i: bootstrap_std(records[i], model, dom, B, (seed, 1, i)),
                              range(runs), threads))
    std = float(np.std(est, ddof=1))
    return MonteCarloSummary(phi_true, mu, runs, est, float(est.mean()), std, std / math.sqrt(runs),
                             crb_std(model, phi_true, mu), boots)


@dataclass
class ScanPoint:
    phi_true: float
    phi_est: float
    bootstrap_std: float
    crb_std: float
    sql_std: float
    hs_std: float
    log_likelihood: float


def estimate_scan_point(model, index: int, phi_true: float, mu: int, B: int, seed: int,
                        domain=None, parametric: bool = False) -> ScanPoint:
    """Sample counts at one scan point, fit, and bootstrap; keys ``(seed, 0|1, index)``."""
    dom = domain if domain is not None else default_domain(model)
    p = np.asarray(_scan_fn(model)(phi_true), dtype=float)
    counts = sample_counts(p, mu, (seed, 0, index))
    run = mle_estimate(counts, model, dom)
    boot = bootstrap_std(counts, model, dom, B, (seed, 1, index), parametric)
    N = model.N
    return ScanPoint(phi_true, run.phi_est, boot, crb_std(model, phi_true, mu),
                     1 / math.sqrt(mu * N), 1 / (math.sqrt(mu) * N), run.log_likelihood)


def estimate_scan(model, phis: Sequence[float], mu: int, B: int, seed: int, domain=None,
                  parametric: bool = False, threads: int = 1) -> list:
    return _map(lambda item: estimate_scan_point(model, item[0], item[1], mu, B, seed, domain, parametric),
                list(enumerate(phis)), threads)
