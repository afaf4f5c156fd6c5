"""Reductions of passage problems for transformed diffusions to Brownian ones.

Two kinds of maps are supported:

* a clock ``rho`` with ``Z(t) = z + B(rho(t))``, so ``tau_n(Z) = rho^{-1}(tau_n(B))``;
* a state map ``v`` with ``Z(t) = v^{-1}(B_t + v(z))`` (conjugation), so the
  barrier ``a`` becomes ``v(a)`` and the start ``z`` becomes ``v(z)``.

Built in: CIR (``v = 2 sqrt z``), Wright-Fisher (``v = 2 arcsin sqrt z``),
geometric Brownian motion against an exponential barrier (log map, linear
Brownian boundary) and Ornstein-Uhlenbeck against ``S0 exp(-mu t)`` (clock
``rho(t) = sigma^2 (exp(2 mu t) - 1) / (2 mu)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .linear import PassageProblem
from .successive import DensityGrid, NthPassageLaw, nth_passage_law

__all__ = [
    "Conjugation",
    "ReducedProblem",
    "TimeChange",
    "cir_conjugation",
    "pushforward_density",
    "pushforward_law",
    "reduce_conjugated",
    "reduce_gbm",
    "reduce_ou",
    "reduce_time_changed",
    "wright_fisher_conjugation",
]


def _expm1_sat(x: float) -> float:
    return math.expm1(x) if x < 709.0 else math.inf


def _bisect_inverse(rho: Callable[[float], float], u: float) -> float:
    if u < 0:
        raise ValueError(f"clock value must be >= 0, got {u}")
    if u == 0:
        return 0.0
    hi = 1.0
    while rho(hi) < u:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError(f"clock never reaches {u}")
    return brentq(lambda s: rho(s) - u, 0.0, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass(frozen=True)
class TimeChange:
    """Increasing clock with ``rho(0) = 0`` and its inverse."""

    rho: Callable[[float], float]
    derivative: Callable[[float], float]
    rho_inverse: Callable[[float], float] | None = None
    name: str = "custom"

    def __post_init__(self):
        if abs(self.rho(0.0)) > 1e-12:
            raise ValueError("time change must satisfy rho(0) = 0")
        grid = np.linspace(0.0, 10.0, 1001)
        vals = np.array([self.rho(t) for t in grid])
        if np.any(np.diff(vals) <= 0):
            raise ValueError("time change must be strictly increasing")
        if self.rho_inverse is None:
            object.__setattr__(self, "rho_inverse", lambda u: _bisect_inverse(self.rho, u))

    @classmethod
    def identity(cls) -> "TimeChange":
        return cls(lambda t: t, lambda t: 1.0, lambda u: u, name="rho(t) = t")

    @classmethod
    def linear(cls, c: float) -> "TimeChange":
        if not c > 0:
            raise ValueError("clock rate must be positive")
        return cls(lambda t: c * t, lambda t: c, lambda u: u / c, name=f"rho(t) = {c:.6g}*t")

    @classmethod
    def power(cls, k: float) -> "TimeChange":
        if not k > 0:
            raise ValueError("exponent must be positive")

        def derivative(t: float) -> float:
            if t > 0:
                return k * t ** (k - 1)
            if k > 1:
                return 0.0
            return 1.0 if k == 1 else math.inf

        return cls(lambda t: t**k, derivative, lambda u: u ** (1.0 / k), name=f"rho(t) = t^{k:.6g}")

    @classmethod
    def ornstein_uhlenbeck(cls, mu: float, sigma: float) -> "TimeChange":
        c = sigma * sigma / (2.0 * mu)
        return cls(
            lambda t: c * _expm1_sat(2.0 * mu * t),
            lambda t: sigma * sigma * (_expm1_sat(2.0 * mu * t) + 1.0),
            lambda u: math.log1p(u / c) / (2.0 * mu),
            name=f"rho(t) = {c:.6g}*(exp({2.0 * mu:.6g}*t) - 1)",
        )


@dataclass(frozen=True)
class Conjugation:
    """Increasing state map ``v`` with ``v(0) = 0`` on ``[lower, upper]``."""

    v: Callable[[float], float]
    v_inverse: Callable[[float], float]
    lower: float = 0.0
    upper: float = math.inf
    name: str = "custom"

    def __post_init__(self):
        if abs(self.v(0.0)) > 1e-12:
            raise ValueError("conjugating map must satisfy v(0) = 0")
        hi = self.upper if math.isfinite(self.upper) else self.lower + 100.0
        grid = np.linspace(self.lower, hi, 1000)
        vals = np.array([self.v(z) for z in grid])
        if np.any(np.diff(vals) <= 0):
            raise ValueError("conjugating map must be strictly increasing on its domain")

    def contains(self, z: float) -> bool:
        return self.lower <= z <= self.upper

    def __call__(self, z: float) -> float:
        if not self.contains(z):
            raise ValueError(f"state {z} outside [{self.lower}, {self.upper}] for {self.name}")
        return self.v(z)


def cir_conjugation() -> Conjugation:
    return Conjugation(lambda z: 2.0 * math.sqrt(z), lambda w: 0.25 * w * w, 0.0, math.inf, "cir")


def wright_fisher_conjugation() -> Conjugation:
    return Conjugation(
        lambda z: 2.0 * math.asin(math.sqrt(z)),
        lambda w: math.sin(0.5 * w) ** 2,
        0.0,
        1.0,
        "wright-fisher",
    )


@dataclass(frozen=True)
class ReducedProblem:
    bm_problem: PassageProblem
    time_map: TimeChange = field(default_factory=TimeChange.identity)
    description: str = ""

    def passage_time(self, bm_time: float) -> float:
        """Map a Brownian passage time to the passage time of the original process."""
        if math.isinf(bm_time):
            return math.inf
        return self.time_map.rho_inverse(bm_time)

    def inter_passage_times(self, bm_times) -> np.ndarray:
        """``T_n = rho^{-1}(tau_n^B) - rho^{-1}(tau_{n-1}^B)`` with ``tau_0 = 0``."""
        mapped = np.array([0.0] + [self.passage_time(t) for t in bm_times])
        return np.diff(mapped)


def reduce_time_changed(z: float, a: float, tc: TimeChange) -> ReducedProblem:
    if z == a:
        raise ValueError("start equals barrier")
    return ReducedProblem(PassageProblem(x=z, a=a, b=0.0), tc, f"time-changed BM, {tc.name}")


def reduce_conjugated(
    kind: str, z: float, a: float, custom_v: Conjugation | None = None
) -> ReducedProblem:
    kind = kind.lower().replace("_", "").replace("-", "")
    if kind == "cir":
        conj = cir_conjugation()
    elif kind == "wrightfisher" or kind == "wf":
        conj = wright_fisher_conjugation()
    elif kind == "custom":
        if custom_v is None:
            raise ValueError("custom reduction needs a Conjugation")
        conj = custom_v
    else:
        raise ValueError(f"unknown conjugated process {kind!r}")
    zp, ap = conj(z), conj(a)
    if zp == ap:
        raise ValueError("start and barrier coincide after the state map")
    return ReducedProblem(PassageProblem(x=zp, a=ap, b=0.0), TimeChange.identity(), f"{conj.name}: v(z)={zp:.6g}, v(a)={ap:.6g}")


def reduce_gbm(z: float, r: float, sigma: float, s0: float, mu_prime: float) -> ReducedProblem:
    """GBM ``dZ = r Z dt + sigma Z dB`` against ``exp(sigma s0 + mu_prime t)``."""
    if not z > 0:
        raise ValueError("GBM start must be positive")
    if not sigma > 0:
        raise ValueError("volatility must be positive")
    mu = r - 0.5 * sigma * sigma
    x = math.log(z) / sigma
    b = (mu_prime - mu) / sigma
    return ReducedProblem(PassageProblem(x=x, a=s0, b=b), TimeChange.identity(), f"gbm: mu={mu:.6g}")


def reduce_ou(z: float, mu: float, sigma: float, s0: float) -> ReducedProblem:
    """OU ``dZ = -mu Z dt + sigma dB`` against ``s0 exp(-mu t)`` with ``s0 > z``."""
    if not (mu > 0 and sigma > 0):
        raise ValueError("mu and sigma must be positive")
    if not s0 > z:
        raise ValueError("barrier level must exceed the start (s0 > z)")
    tc = TimeChange.ornstein_uhlenbeck(mu, sigma)
    return ReducedProblem(PassageProblem(x=z, a=s0, b=0.0), tc, f"ou: {tc.name}")


def pushforward_density(reduced: ReducedProblem, bm_density: Callable[[float], float]) -> Callable[[float], float]:
    """``t -> f_B(rho(t)) rho'(t)``."""
    tm = reduced.time_map

    def f(t: float) -> float:
        if t <= 0:
            return 0.0
        u = tm.rho(t)
        if math.isinf(u):
            return 0.0
        return bm_density(u) * tm.derivative(t)

    return f


def pushforward_law(reduced: ReducedProblem, n: int, grid, **kwargs) -> NthPassageLaw:
    """Law of the n-th passage of the original process on the time grid ``grid``.

    The density is ``f_B(rho(t)) rho'(t)``; the atom at infinity carries over
    unchanged and ``support`` stays on the Brownian clock.
    """
    t = np.asarray(grid, dtype=float)
    tm = reduced.time_map
    u = np.array([tm.rho(ti) for ti in t])
    jac = np.array([tm.derivative(ti) for ti in t])
    bm = nth_passage_law(reduced.bm_problem, n, u, **kwargs)
    density = DensityGrid(t, bm.density.values * jac)
    return NthPassageLaw(n, density, bm.atom_at_infinity, bm.support, bm.b)
