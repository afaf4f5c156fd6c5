"""Monte Carlo oracle for passage times.

Paths are simulated on a time grid and boundary crossings between grid
points are detected with the Brownian-bridge probability

    P(cross | D_k = d0, D_{k+1} = d1) = exp(-2 d0 d1 / (sigma^2 h))   (same sign)

which is exact for Brownian motion with drift, since a bridge between fixed
endpoints does not feel the drift.  For the Euler schemes the local
diffusion coefficient at the left endpoint is used.

Paths are processed in fixed-size blocks.  Block ``i`` draws from
``SeedSequence([seed, i])``, so a given seed and block size give
bit-identical samples whatever the number of worker threads.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linear import PassageProblem

__all__ = [
    "EulerSample",
    "McConfig",
    "McEstimate",
    "PassageSample",
    "bridge_crossing_probability",
    "brownian_paths",
    "estimate_last_passage_cdf",
    "estimate_no_zero_probability",
    "euler_paths",
    "simulate_euler",
    "simulate_first_passage",
]

log = logging.getLogger(__name__)

THREADS_ENV = "PASSAGE_LAB_THREADS"


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 100_000
    dt: float = 1e-3
    horizon: float = 50.0
    seed: int = 0
    workers: int | None = None
    block_size: int = 8192
    bridge: bool = True

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.horizon >= self.dt:
            raise ValueError("horizon must be >= dt")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be >= 1")

    def n_workers(self) -> int:
        n = self.workers or os.cpu_count() or 1
        cap = os.environ.get(THREADS_ENV)
        if cap:
            n = min(n, max(1, int(cap)))
        return n


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    n_effective: int

    def within(self, target: float, k: float = 3.0, bias: float = 0.0) -> bool:
        return abs(self.value - target) <= k * self.std_error + bias


def _proportion(hits: int, n: int) -> McEstimate:
    p = hits / n
    return McEstimate(p, math.sqrt(max(p * (1.0 - p), 0.0) / n), n)


@dataclass(frozen=True)
class PassageSample:
    """Passage times; ``inf`` marks paths censored at the horizon."""

    times: np.ndarray
    horizon: float

    @property
    def censored(self) -> np.ndarray:
        return ~np.isfinite(self.times)

    def __len__(self) -> int:
        return self.times.size

    def cdf(self, t: float) -> McEstimate:
        """Empirical ``P(tau <= t)`` with its binomial standard error."""
        if t > self.horizon:
            raise ValueError("cannot estimate the CDF beyond the horizon")
        return _proportion(int(np.count_nonzero(self.times <= t)), self.times.size)

    def mean(self) -> McEstimate:
        """Mean of the uncensored times."""
        ok = self.times[np.isfinite(self.times)]
        if ok.size < 2:
            raise ValueError("too few uncensored passages for a mean")
        return McEstimate(float(ok.mean()), float(ok.std(ddof=1) / math.sqrt(ok.size)), int(ok.size))

    def median(self) -> float:
        return float(np.median(self.times))


@dataclass(frozen=True)
class EulerSample(PassageSample):
    clamped_steps: int = 0


def bridge_crossing_probability(d0, d1, variance):
    """Probability that a bridge from ``d0`` to ``d1`` touches zero."""
    d0 = np.asarray(d0, dtype=float)
    d1 = np.asarray(d1, dtype=float)
    prod = d0 * d1
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        p = np.where(prod <= 0, 1.0, np.exp(-2.0 * prod / variance))
    return np.where(np.isnan(p), 0.0, p)


def _crossed(d0, d1, variance, rng, bridge: bool) -> np.ndarray:
    hit = d0 * d1 <= 0
    if bridge:
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            p = np.exp(-2.0 * d0 * d1 / variance)
        hit |= rng.random(d0.size) < np.nan_to_num(p, nan=0.0)
    return hit


def _interp_fraction(d0, d1):
    a0 = np.abs(d0)
    tot = a0 + np.abs(d1)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(tot > 0, a0 / tot, 0.0)
    return w


def _run_blocks(cfg: McConfig, block_fn: Callable[[np.random.Generator, int], np.ndarray]) -> np.ndarray:
    n_blocks = -(-cfg.n_paths // cfg.block_size)
    sizes = [min(cfg.block_size, cfg.n_paths - i * cfg.block_size) for i in range(n_blocks)]

    def run(i: int):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, i]))
        return block_fn(rng, sizes[i])

    workers = min(cfg.n_workers(), n_blocks)
    if workers == 1:
        parts = [run(i) for i in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    return parts


def _steps(span: float, dt: float) -> tuple[int, float]:
    n = max(1, int(math.ceil(span / dt - 1e-9)))
    return n, span / n


def _first_zero(d_start: np.ndarray, drift: float, t0: float, span: float, cfg: McConfig, rng) -> np.ndarray:
    """First bridge-detected zero of ``D`` after ``t0`` within ``span``; ``inf`` if none."""
    n_steps, h = _steps(span, cfg.dt)
    sq = math.sqrt(h)
    out = np.full(d_start.size, np.inf)
    idx = np.arange(d_start.size)
    d = d_start.astype(float, copy=True)
    for k in range(n_steps):
        if idx.size == 0:
            break
        dn = d + drift * h + sq * rng.standard_normal(idx.size)
        hit = _crossed(d, dn, h, rng, cfg.bridge)
        if hit.any():
            out[idx[hit]] = t0 + (k + _interp_fraction(d[hit], dn[hit])) * h
            keep = ~hit
            idx = idx[keep]
            d = dn[keep]
        else:
            d = dn
    return out


def simulate_first_passage(p: PassageProblem, cfg: McConfig) -> PassageSample:
    """Sample first-passage times of ``x + B_t`` through ``a + b t``."""
    p.require_off_boundary()
    d0 = p.x - p.a

    def block(rng, m):
        return _first_zero(np.full(m, d0), -p.b, 0.0, cfg.horizon, cfg, rng)

    times = np.concatenate(_run_blocks(cfg, block))
    return PassageSample(times, cfg.horizon)


def estimate_no_zero_probability(b: float, s: float, gap: float, cfg: McConfig) -> McEstimate:
    """Fraction of paths started on the line with no zero in ``(s, s + gap)``.

    The distance at time ``s`` is drawn exactly, ``N(-b s, s)``; only the
    window itself is stepped.
    """
    if not s > 0 or gap < 0:
        raise ValueError("need s > 0 and gap >= 0")
    if gap == 0:
        return McEstimate(1.0, 0.0, cfg.n_paths)

    def block(rng, m):
        d_s = -b * s + math.sqrt(s) * rng.standard_normal(m)
        return _first_zero(d_s, -b, s, gap, cfg, rng)

    times = np.concatenate(_run_blocks(cfg, block))
    return _proportion(int(np.count_nonzero(np.isinf(times))), times.size)


def estimate_last_passage_cdf(b: float, t: float, u: float, cfg: McConfig) -> McEstimate:
    """Empirical ``P(last zero before t <= u)`` for paths started on the line."""
    if not 0 < u < t:
        raise ValueError("need 0 < u < t")
    return estimate_no_zero_probability(b, u, t - u, cfg)


def brownian_paths(n_paths: int, n_steps: int, dt: float, seed: int) -> np.ndarray:
    """Brownian paths on ``k * dt``, ``k = 0..n_steps``, shape ``(n_paths, n_steps + 1)``."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    inc = math.sqrt(dt) * rng.standard_normal((n_paths, n_steps))
    return np.concatenate([np.zeros((n_paths, 1)), np.cumsum(inc, axis=1)], axis=1)


# --- Euler schemes ----------------------------------------------------------


@dataclass(frozen=True)
class _Model:
    drift: Callable[[np.ndarray], np.ndarray]
    vol: Callable[[np.ndarray], np.ndarray]
    barrier: Callable[[float], float]
    lower: float
    upper: float


def _model(kind: str, params: dict) -> tuple[_Model, float]:
    kind = kind.lower().replace("-", "").replace("_", "")
    z = float(params["z"])
    if kind == "cir":
        a = float(params["barrier"])
        if z < 0 or a < 0:
            raise ValueError("CIR states must be >= 0")
        return _Model(lambda x: np.full_like(x, 0.25), lambda x: np.sqrt(np.maximum(x, 0.0)), lambda t: a, 0.0, math.inf), z
    if kind in ("wrightfisher", "wf"):
        a = float(params["barrier"])
        if not (0 <= z <= 1 and 0 <= a <= 1):
            raise ValueError("Wright-Fisher states must lie in [0, 1]")
        return _Model(
            lambda x: 0.25 - 0.5 * x,
            lambda x: np.sqrt(np.maximum(x * (1.0 - x), 0.0)),
            lambda t: a,
            0.0,
            1.0,
        ), z
    if kind == "gbm":
        r, sigma = float(params["r"]), float(params["sigma"])
        s0, mu_prime = float(params["s0"]), float(params["mu_prime"])
        if z <= 0 or sigma <= 0:
            raise ValueError("GBM needs z > 0 and sigma > 0")
        return _Model(
            lambda x: r * x, lambda x: sigma * x, lambda t: math.exp(sigma * s0 + mu_prime * t), 0.0, math.inf
        ), z
    if kind == "ou":
        mu, sigma, s0 = float(params["mu"]), float(params["sigma"]), float(params["s0"])
        if mu <= 0 or sigma <= 0 or s0 <= z:
            raise ValueError("OU needs mu > 0, sigma > 0 and s0 > z")
        return _Model(
            lambda x: -mu * x, lambda x: np.full_like(x, sigma), lambda t: s0 * math.exp(-mu * t), -math.inf, math.inf
        ), z
    raise ValueError(f"unknown process kind {kind!r}")


def _euler_step(model: _Model, x: np.ndarray, h: float, rng, kind: str):
    sig = model.vol(x)
    xn = x + model.drift(x) * h + sig * math.sqrt(h) * rng.standard_normal(x.size)
    bad = (xn < model.lower) | (xn > model.upper)
    clamped = int(np.count_nonzero(bad))
    if clamped:
        xn = np.clip(xn, model.lower, model.upper)
    if not np.all(np.isfinite(xn)):
        raise FloatingPointError(f"{kind} Euler scheme produced non-finite states; reduce dt")
    return xn, sig, clamped


def euler_paths(kind: str, params: dict, n_paths: int, horizon: float, dt: float, seed: int) -> np.ndarray:
    """Full Euler state paths (no barrier), shape ``(n_paths, n_steps + 1)``."""
    model, z = _model(kind, params)
    n_steps, h = _steps(horizon, dt)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    out = np.empty((n_paths, n_steps + 1))
    out[:, 0] = z
    for k in range(n_steps):
        out[:, k + 1] = _euler_step(model, out[:, k], h, rng, kind)[0]
    return out


def simulate_euler(kind: str, params: dict, cfg: McConfig) -> EulerSample:
    """Euler-Maruyama first passages through the process's barrier.

    ``kind`` is one of ``cir``, ``wf``, ``gbm``, ``ou``; ``params`` holds
    ``z`` and the process constants (``barrier`` for CIR/WF; ``r, sigma,
    s0, mu_prime`` for GBM; ``mu, sigma, s0`` for OU).  Updates that leave the
    state space are projected back onto it and counted in ``clamped_steps``.
    """
    model, z = _model(kind, params)
    n_steps, h = _steps(cfg.horizon, cfg.dt)
    barrier = np.array([model.barrier(k * h) for k in range(n_steps + 1)])

    def block(rng, m):
        out = np.full(m, np.inf)
        idx = np.arange(m)
        x = np.full(m, z)
        clamped = 0
        for k in range(n_steps):
            if idx.size == 0:
                break
            xn, sig, c = _euler_step(model, x, h, rng, kind)
            clamped += c
            d0 = x - barrier[k]
            d1 = xn - barrier[k + 1]
            hit = _crossed(d0, d1, np.maximum(sig * sig * h, 1e-300), rng, cfg.bridge)
            if hit.any():
                out[idx[hit]] = (k + _interp_fraction(d0[hit], d1[hit])) * h
                keep = ~hit
                idx = idx[keep]
                x = xn[keep]
            else:
                x = xn
        return out, clamped

    parts = _run_blocks(cfg, block)
    times = np.concatenate([p[0] for p in parts])
    clamped = sum(p[1] for p in parts)
    if clamped:
        log.info("%s Euler scheme: %d updates projected back onto the state space", kind, clamped)
    return EulerSample(times, cfg.horizon, clamped)
