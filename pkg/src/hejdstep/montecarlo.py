"""Monte-Carlo oracle: path simulation, step-call pricing, duality check.

Paths are exact in law: jump counts are Poisson, jump epochs are order
statistics of uniforms (the same law as an exponential clock), jump marks are
drawn from the exponential mixture, and Brownian increments are sampled
exactly on the merged grid of jump epochs and dt multiples.  The occupation
time below the barrier is accumulated with the left-endpoint rule on that
merged grid.  Randomness comes from counter-based Philox streams keyed by
(seed, stream, batch), so results are bit-reproducible for a fixed
configuration regardless of batch scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError
from .model import DownOutStepSpec, DualModelReport, HejdModel, dual_model

__all__ = [
    "PathConfig",
    "McEstimate",
    "DualityReport",
    "simulate_terminal",
    "mc_euro_step_price",
    "verify_duality",
]


@dataclass(frozen=True)
class PathConfig:
    """Simulation controls.

    ``n_paths`` counts returned paths; with ``antithetic`` the second half
    mirrors the Brownian draws of the first half (jump pattern shared), so
    path i pairs with path i + n_paths/2.  ``max_grid_points`` caps
    n_paths * ceil(T/dt).
    """

    n_paths: int
    dt: float = 1e-3
    seed: int = 0
    antithetic: bool = False
    max_grid_points: float = 4.0e9
    batch_size: int = 1 << 17

    def __post_init__(self) -> None:
        if self.n_paths < 10_000:
            raise ValueError("n_paths must be at least 10_000")
        if not 0.0 < self.dt <= 1e-3:
            raise ValueError("dt must lie in (0, 1e-3] years")
        if self.antithetic and self.n_paths % 2:
            raise ValueError("antithetic sampling needs an even n_paths")
        if self.batch_size < 2:
            raise ValueError("batch_size must be at least 2")


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    n_paths: int
    dt: float

    def __post_init__(self) -> None:
        if self.std_error < 0.0:
            raise ValueError("std_error cannot be negative")


@dataclass(frozen=True)
class DualityReport:
    """Both sides of the call-put duality with their pooled deviation."""

    call: McEstimate
    dual_put: McEstimate
    difference: float
    pooled_se: float
    z_score: float


def _rng(seed: int, stream: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, stream, batch))))


def _draw_jumps(model: HejdModel, rng: np.random.Generator, n: int, horizon: float):
    """Sorted-by-(path, time) jump epochs and marks for n paths on [0, horizon]."""
    counts = rng.poisson(model.lam * horizon, size=n)
    total = int(counts.sum())
    if total == 0:
        return counts, np.empty(0), np.empty(0), np.empty(0, dtype=np.int64)
    times = rng.random(total) * horizon
    weights = np.array(model.up_weights + model.down_weights)
    rates = np.array(model.up_rates + model.down_rates)
    comp = np.searchsorted(np.cumsum(weights), rng.random(total), side="right")
    comp = np.minimum(comp, len(weights) - 1)
    magnitude = rng.standard_exponential(total) / rates[comp]
    sizes = np.where(comp < model.m, magnitude, -magnitude)
    path_ids = np.repeat(np.arange(n, dtype=np.int64), counts)
    order = np.lexsort((times, path_ids))
    return counts, times[order], sizes[order], path_ids[order]


def _advance_jump_paths(
    X: np.ndarray,
    occ: np.ndarray,
    jp: np.ndarray,
    path_slice: np.ndarray,
    times_slice: np.ndarray,
    sizes_slice: np.ndarray,
    t0: float,
    t1: float,
    drift: float,
    sigma: float,
    x_barrier: float,
    rng: np.random.Generator,
    mirror: bool,
) -> None:
    """Exact sub-stepping of the paths that jump inside (t0, t1].

    X and occ have shape (n_rep, n_paths); with mirror=True the second row
    reuses the negated normal draws of the first (antithetic Brownian part).
    """
    pos = np.searchsorted(jp, path_slice)
    cur_t = np.full(len(jp), t0)
    # rank of each jump within its (path, step) group
    first_idx = np.searchsorted(path_slice, jp)
    rank = np.arange(len(path_slice)) - first_idx[pos]
    max_rank = int(rank.max()) if len(rank) else -1
    for rnk in range(max_rank + 1):
        sel = rank == rnk
        p_sel = pos[sel]
        dt_sub = times_slice[sel] - cur_t[p_sel]
        z = rng.standard_normal(int(sel.sum()))
        zs = np.stack([z, -z]) if mirror else z[None, :]
        left = X[:, jp[p_sel]]
        occ[:, jp[p_sel]] += dt_sub * (left < x_barrier)
        X[:, jp[p_sel]] = left + drift * dt_sub + sigma * np.sqrt(dt_sub) * zs + sizes_slice[sel]
        cur_t[p_sel] = times_slice[sel]
    dt_fin = t1 - cur_t
    z = rng.standard_normal(len(jp))
    zs = np.stack([z, -z]) if mirror else z[None, :]
    left = X[:, jp]
    occ[:, jp] += dt_fin * (left < x_barrier)
    X[:, jp] = left + drift * dt_fin + sigma * np.sqrt(dt_fin) * zs


def simulate_terminal(
    model: HejdModel,
    x: float,
    barrier: float,
    horizon: float,
    cfg: PathConfig,
    stream: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Terminal prices and occupation times below the barrier.

    Returns (s_terminal, occupation), each of length cfg.n_paths.  With
    antithetic sampling the arrays hold the base half followed by the
    mirrored half.
    """
    if not horizon > 0.0:
        raise ValueError("horizon must be strictly positive")
    if x <= 0.0:
        raise ValueError("spot must be strictly positive")
    n_steps = int(math.ceil(horizon / cfg.dt - 1e-12))
    if cfg.n_paths * n_steps > cfg.max_grid_points:
        raise BudgetError(
            f"n_paths * steps = {cfg.n_paths * n_steps:.3e} exceeds budget {cfg.max_grid_points:.3e}"
        )
    if barrier < 0.0:
        raise ValueError("barrier must be non-negative")
    x_barrier = -math.inf if barrier == 0.0 else (math.inf if math.isinf(barrier) else math.log(barrier / x))

    n_base = cfg.n_paths // 2 if cfg.antithetic else cfg.n_paths
    n_rep = 2 if cfg.antithetic else 1
    drift, sigma = model.drift, model.sigma
    s_out = np.empty(cfg.n_paths)
    occ_out = np.empty(cfg.n_paths)

    done = 0
    batch_index = 0
    while done < n_base:
        nb = min(cfg.batch_size, n_base - done)
        rng = _rng(cfg.seed, stream, batch_index)
        X = np.zeros((n_rep, nb))
        occ = np.zeros((n_rep, nb))
        if model.lam > 0.0:
            counts, jt, js, jpaths = _draw_jumps(model, rng, nb, horizon)
            jstep = np.minimum((jt / cfg.dt).astype(np.int64), n_steps - 1)
            order = np.lexsort((jt, jpaths, jstep))
            jt, js, jpaths, jstep = jt[order], js[order], jpaths[order], jstep[order]
            step_bounds = np.searchsorted(jstep, np.arange(n_steps + 1))
        else:
            jt = np.empty(0)
            step_bounds = np.zeros(n_steps + 1, dtype=np.int64)

        below = np.empty((n_rep, nb), dtype=bool)
        zbuf = np.empty(nb)
        for k in range(n_steps):
            t0 = k * cfg.dt
            t1 = min((k + 1) * cfg.dt, horizon)
            h = t1 - t0
            lo, hi = step_bounds[k], step_bounds[k + 1]
            if hi > lo:
                jp = np.unique(jpaths[lo:hi])
                x_old = X[:, jp].copy()
                occ_old = occ[:, jp].copy()
            # flat update of every path; jump paths are rolled back below
            rng.standard_normal(out=zbuf)
            np.less(X, x_barrier, out=below)
            np.add(occ, h, out=occ, where=below)
            scale = sigma * math.sqrt(h)
            if cfg.antithetic:
                X[0] += drift * h + scale * zbuf
                X[1] += drift * h - scale * zbuf
            else:
                X[0] += drift * h + scale * zbuf
            if hi > lo:
                X[:, jp] = x_old
                occ[:, jp] = occ_old
                _advance_jump_paths(
                    X, occ, jp, jpaths[lo:hi], jt[lo:hi], js[lo:hi],
                    t0, t1, drift, sigma, x_barrier, rng, cfg.antithetic,
                )

        np.clip(occ, 0.0, horizon, out=occ)
        s_batch = x * np.exp(X)
        if cfg.antithetic:
            half = n_base
            s_out[done : done + nb] = s_batch[0]
            s_out[half + done : half + done + nb] = s_batch[1]
            occ_out[done : done + nb] = occ[0]
            occ_out[half + done : half + done + nb] = occ[1]
        else:
            s_out[done : done + nb] = s_batch[0]
            occ_out[done : done + nb] = occ[0]
        done += nb
        batch_index += 1
    return s_out, occ_out


def _estimate(samples: np.ndarray, antithetic: bool, n_paths: int, dt: float) -> McEstimate:
    if antithetic:
        half = len(samples) // 2
        samples = 0.5 * (samples[:half] + samples[half:])
    value = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / math.sqrt(len(samples)))
    return McEstimate(value=value, std_error=se, n_paths=n_paths, dt=dt)


def mc_euro_step_price(
    model: HejdModel,
    spec: DownOutStepSpec,
    horizon: float,
    x: float,
    cfg: PathConfig,
    stream: int = 0,
) -> McEstimate:
    """Monte-Carlo value of the European step call (seasoning included)."""
    s_t, occ = simulate_terminal(model, x, spec.barrier, horizon, cfg, stream=stream)
    disc = math.exp(-model.r * horizon)
    payoff = disc * np.exp(spec.knock_rate * (spec.seasoning + occ)) * np.maximum(s_t - spec.strike, 0.0)
    return _estimate(payoff, cfg.antithetic, cfg.n_paths, cfg.dt)


def verify_duality(
    model: HejdModel,
    spec: DownOutStepSpec,
    horizon: float,
    x: float,
    cfg: PathConfig,
) -> DualityReport:
    """Compare the step call under the model with the equivalent step put
    under the dual market.

    The dual put starts at the original strike, is struck at the original
    spot, and decays with the occupation time *above* the transformed barrier
    x*K/L (above-barrier time is horizon minus below-barrier time).  Both
    sides use independent streams derived from cfg.seed.
    """
    call = mc_euro_step_price(model, spec, horizon, x, cfg, stream=0)

    report: DualModelReport = dual_model(model)
    dual = report.model
    barrier_put = math.inf if spec.barrier == 0.0 else x * spec.strike / spec.barrier
    s_t, occ_below = simulate_terminal(dual, spec.strike, barrier_put, horizon, cfg, stream=1)
    occ_above = horizon - occ_below
    disc = math.exp(-dual.r * horizon)
    payoff = (
        disc
        * np.exp(spec.knock_rate * (spec.seasoning + occ_above))
        * np.maximum(x - s_t, 0.0)
    )
    put = _estimate(payoff, cfg.antithetic, cfg.n_paths, cfg.dt)

    diff = call.value - put.value
    pooled = math.hypot(call.std_error, put.std_error)
    z = diff / pooled if pooled > 0.0 else math.inf
    return DualityReport(call=call, dual_put=put, difference=diff, pooled_se=pooled, z_score=z)
