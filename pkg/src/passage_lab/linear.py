"""First- and last-passage laws of Brownian motion against a line.

The boundary is ``S(t) = a + b t`` and the Brownian motion starts at ``x``.
First passage follows the inverse Gaussian / Bachelier-Levy laws; the last
passage before a horizon ``t`` of a path started on the line has the closed
form density :func:`last_passage_density`, which :func:`salminen_density_numeric`
reproduces from its integral representation as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.special import log_ndtr

from .numerics import QuadSpec, _cdf, _pdf, integrate_strict

__all__ = [
    "DefectiveLaw",
    "PassageProblem",
    "first_passage_cdf",
    "first_passage_density",
    "first_passage_law",
    "first_passage_mean",
    "hit_probability",
    "last_passage_cdf",
    "last_passage_density",
    "last_passage_mass",
    "never_return_probability",
    "no_zero_probability",
    "salminen_density_numeric",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LARGE_GAP_RATIO = 1e8


@dataclass(frozen=True)
class PassageProblem:
    """Brownian motion started at ``x`` versus the line ``a + b t``."""

    x: float
    a: float
    b: float

    def __post_init__(self):
        for name in ("x", "a", "b"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def from_drift(cls, x: float, mu: float) -> "PassageProblem":
        """Zeros of ``x + mu t + B_t`` as passages of ``x + B_t`` through ``-mu t``."""
        return cls(x=x, a=0.0, b=-mu)

    @property
    def distance(self) -> float:
        """Unsigned distance ``|a - x|`` from the start to the boundary."""
        return abs(self.a - self.x)

    @property
    def recurrent(self) -> bool:
        return (self.a - self.x) * self.b <= 0.0

    def reflected(self) -> "PassageProblem":
        return PassageProblem(-self.x, -self.a, -self.b)

    def canonical(self) -> "PassageProblem":
        """Equivalent problem with the start below the boundary."""
        return self.reflected() if self.x > self.a else self

    def require_off_boundary(self):
        if self.x == self.a:
            raise ValueError("start point lies on the boundary (x == a)")

    def require_recurrent(self):
        self.require_off_boundary()
        if not self.recurrent:
            raise ValueError(
                f"problem {self} is not recurrent: the first passage is defective "
                "((a - x) * b must be <= 0)"
            )


@dataclass(frozen=True)
class DefectiveLaw:
    """A law on ``(0, inf)`` plus an atom at ``+inf``."""

    density: Callable[[float], float]
    cdf: Callable[[float], float]
    atom_at_infinity: float


def _check_time(t: float, *, allow_zero: bool) -> float:
    t = float(t)
    if math.isnan(t) or t < 0 or (t == 0 and not allow_zero):
        raise ValueError(f"time must be {'>=' if allow_zero else '>'} 0, got {t}")
    return t


def first_passage_density(p: PassageProblem, t: float) -> float:
    p.require_off_boundary()
    t = _check_time(t, allow_zero=False)
    if math.isinf(t):
        return 0.0
    z = (p.a + p.b * t - p.x) / math.sqrt(t)
    if z * z > 1400.0:
        return 0.0
    return p.distance * _pdf(z) / (t * math.sqrt(t))


def first_passage_cdf(p: PassageProblem, t: float) -> float:
    """Bachelier-Levy formula for ``P(tau_1 <= t)``."""
    p.require_off_boundary()
    t = _check_time(t, allow_zero=True)
    if t == 0:
        return 0.0
    if math.isinf(t):
        return hit_probability(p)
    q = p.canonical()
    d = q.a - q.x
    rt = math.sqrt(t)
    head = _cdf(-d / rt - q.b * rt)
    tail = math.exp(-2.0 * q.b * d + float(log_ndtr(q.b * rt - d / rt)))
    return min(1.0, head + tail)


def first_passage_mean(p: PassageProblem) -> float:
    p.require_recurrent()
    if p.b == 0:
        return math.inf
    return p.distance / abs(p.b)


def hit_probability(p: PassageProblem) -> float:
    p.require_off_boundary()
    if (p.a - p.x) * p.b > 0:
        return math.exp(-2.0 * p.b * (p.a - p.x))
    return 1.0


def first_passage_law(p: PassageProblem) -> DefectiveLaw:
    return DefectiveLaw(
        density=lambda t: first_passage_density(p, t),
        cdf=lambda t: first_passage_cdf(p, t),
        atom_at_infinity=1.0 - hit_probability(p),
    )


def _psi(b: float, t: float, u: float) -> float:
    v = t - u
    b2 = b * b
    bracket = math.exp(-0.5 * b2 * v) + 0.5 * b * math.sqrt(2.0 * math.pi * v) * math.erf(b * math.sqrt(0.5 * v))
    return math.exp(-0.5 * b2 * u) / (math.pi * math.sqrt(u * v)) * bracket


def last_passage_density(b: float, t: float, u: float) -> float:
    """Density at ``u`` of the last boundary visit before ``t``.

    Depends on the slope only (not on the intercept); ``b = 0`` gives the
    arcsine density ``1 / (pi sqrt(u (t - u)))``.
    """
    if not (0.0 < u < t) or not math.isfinite(t):
        raise ValueError(f"need 0 < u < t, got u={u}, t={t}")
    if not math.isfinite(b):
        raise ValueError("slope must be finite")
    return _psi(b, t, u)


def salminen_integrand(w: float, v: float, b: float, t: float) -> float:
    """Integrand ``nu_w(v)`` of the last-passage representation (dummy ``w``)."""
    y = w - b * t
    expo = -b * y - 0.5 * b * b * v - y * y / (2.0 * v)
    return math.exp(expo) * abs(y) / math.sqrt(2.0 * math.pi * v**3)


def salminen_density_numeric(b: float, t: float, u: float, spec: QuadSpec | None = None) -> float:
    """Last-passage density from its integral form, by quadrature.

    The dummy variable runs over the whole real line; the integrand has a
    kink at ``w = b t`` so each side is integrated separately.
    """
    if not (0.0 < u < t) or not math.isfinite(t):
        raise ValueError(f"need 0 < u < t, got u={u}, t={t}")
    spec = (spec or QuadSpec()).with_singular()
    v = t - u
    kink = b * t
    scale = math.sqrt(v)
    right = integrate_strict(
        lambda w: salminen_integrand(w, v, b, t), kink, math.inf, spec, scale=scale, what="salminen integral"
    )
    left = integrate_strict(
        lambda w: salminen_integrand(w, v, b, t), -math.inf, kink, spec, scale=scale, what="salminen integral"
    )
    return math.exp(-0.5 * b * b * u) / math.sqrt(2.0 * math.pi * u) * (left + right)


def _theta_integrand(b: float, horizon: float) -> Callable[[float], float]:
    # psi_T(y) dy under y = T sin^2(theta); both endpoint singularities cancel.
    b2 = b * b
    c = 0.5 * b * math.sqrt(2.0 * math.pi)

    def g(th: float) -> float:
        s = math.sin(th)
        co = math.cos(th)
        y = horizon * s * s
        v = horizon * co * co
        rv = math.sqrt(v)
        return (2.0 / math.pi) * math.exp(-0.5 * b2 * y) * (
            math.exp(-0.5 * b2 * v) + c * rv * math.erf(b * rv / math.sqrt(2.0))
        )

    return g


def last_passage_cdf(b: float, t: float, u: float, spec: QuadSpec | None = None) -> float:
    """``P(last visit before t <= u)``, i.e. no boundary visit in ``(u, t)``."""
    if not (0.0 <= u <= t) or not math.isfinite(t) or t <= 0:
        raise ValueError(f"need 0 <= u <= t, got u={u}, t={t}")
    if u == t:
        return 1.0
    if u == 0:
        return 0.0
    if b == 0:
        return (2.0 / math.pi) * math.asin(math.sqrt(u / t))
    spec = (spec or QuadSpec()).with_singular()
    theta = math.asin(math.sqrt(u / t))
    value = integrate_strict(_theta_integrand(b, t), 0.0, theta, spec, what="no-zero probability")
    return min(1.0, max(0.0, value))  # roundoff near the endpoints


def no_zero_probability(b: float, s: float, gap: float, spec: QuadSpec | None = None) -> float:
    """Probability that a path started on the line has no zero in ``(s, s + gap)``.

    Computed as the last-passage mass on ``(0, s)`` for horizon ``s + gap``.
    Huge gaps use the closed-form limit :func:`never_return_probability`.
    """
    if not s > 0 or not math.isfinite(s):
        raise ValueError(f"s must be positive and finite, got {s}")
    if math.isnan(gap) or gap < 0:
        raise ValueError(f"gap must be >= 0, got {gap}")
    if gap == 0:
        return 1.0
    if gap > _LARGE_GAP_RATIO * s:
        return never_return_probability(b, s)
    return last_passage_cdf(b, s + gap, s, spec)


def never_return_probability(b: float, s: float) -> float:
    """``2 sgn(b) (Phi(b sqrt(s)) - 1/2)``, with ``sgn(0) = 0``."""
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    if b == 0:
        return 0.0
    # 2 sgn(b) (Phi(b r) - 1/2) == erf(|b| r / sqrt 2)
    return math.erf(abs(b) * math.sqrt(0.5 * s))


def last_passage_mass(b: float, t: float, spec: QuadSpec | None = None) -> float:
    """Total last-passage mass on ``(0, t)``, by quadrature over the whole range."""
    if not (t > 0 and math.isfinite(t)):
        raise ValueError(f"t must be positive and finite, got {t}")
    spec = (spec or QuadSpec()).with_singular()
    return integrate_strict(_theta_integrand(b, t), 0.0, 0.5 * math.pi, spec, what="last-passage mass")
