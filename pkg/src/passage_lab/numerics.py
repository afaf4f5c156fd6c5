"""Special functions and a quadrature engine for singular-endpoint integrals.

Every density in this package is either smooth, singular like
``(t - c)**-0.5`` at an endpoint, or slowly decaying on a half-line.  The
engine removes those features by a change of variables and hands the
resulting smooth integrand to QUADPACK (``scipy.integrate.quad``):

* left singularity at ``c``:       ``t = c + w**2``
* right singularity at ``c``:      ``t = c - w**2``
* both endpoints singular:         ``t = lo + (hi - lo) * sin(theta)**2``
* half-line tail beyond ``m``:     ``t = m + scale * (1 / w**2 - 1)``

The tail map turns a ``t**-1.5`` decay into a bounded integrand on ``(0, 1]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _spi

__all__ = [
    "ConvergenceError",
    "QuadResult",
    "QuadSpec",
    "integrate",
    "integrate_log",
    "integrate_strict",
    "std_normal_cdf",
    "std_normal_pdf",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class ConvergenceError(RuntimeError):
    """Raised when a quadrature does not meet its tolerance."""

    def __init__(self, message: str, result: "QuadResult | None" = None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class QuadSpec:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    max_subdivisions: int = 200
    singular_left: bool = False
    singular_right: bool = False

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    def with_singular(self, left: bool = False, right: bool = False) -> "QuadSpec":
        return QuadSpec(self.abs_tol, self.rel_tol, self.max_subdivisions, left, right)

    def tightened(self, factor: float) -> "QuadSpec":
        return QuadSpec(
            self.abs_tol * factor,
            self.rel_tol * factor,
            self.max_subdivisions,
            self.singular_left,
            self.singular_right,
        )


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    converged: bool


def _check_finite(z: float) -> float:
    z = float(z)
    if not math.isfinite(z):
        raise ValueError(f"expected a finite real, got {z!r}")
    return z


def std_normal_pdf(z: float) -> float:
    z = _check_finite(z)
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def std_normal_cdf(z: float) -> float:
    """Standard Gaussian CDF through ``erfc``, accurate in both tails."""
    z = _check_finite(z)
    return 0.5 * math.erfc(-z * _INV_SQRT2)


# Fast unchecked variants for inner loops.
def _pdf(z: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def _cdf(z: float) -> float:
    return 0.5 * math.erfc(-z * _INV_SQRT2)


def _quad(g: Callable[[float], float], lo: float, hi: float, abs_tol: float, rel_tol: float, limit: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = _spi.quad(g, lo, hi, epsabs=abs_tol, epsrel=rel_tol, limit=limit, full_output=1)
    value, err, info = out[0], out[1], out[2]
    ier = 0 if len(out) == 3 else 1
    if not math.isfinite(value):
        ier = 1
    return value, abs(err), ier, info.get("neval", 0) if isinstance(info, dict) else 0


def _finite_piece(f, lo, hi, left, right):
    """Return (g, a, b) such that int_lo^hi f == int_a^b g with g smooth."""
    length = hi - lo
    if left and right:
        def g(th):
            s = math.sin(th)
            c = math.cos(th)
            return f(lo + length * s * s) * 2.0 * length * s * c

        return g, 0.0, 0.5 * math.pi
    if left:
        def g(w):
            return f(lo + w * w) * 2.0 * w

        return g, 0.0, math.sqrt(length)
    if right:
        def g(w):
            return f(hi - w * w) * 2.0 * w

        return g, 0.0, math.sqrt(length)
    return f, lo, hi


def _tail_piece(f, m, scale):
    def g(w):
        if w <= 0.0:
            return 0.0
        inv = 1.0 / (w * w)
        val = f(m + scale * (inv - 1.0))
        if val == 0.0:
            return 0.0
        return val * 2.0 * scale * inv / w

    return g, 0.0, 1.0


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    spec: QuadSpec | None = None,
    *,
    scale: float = 1.0,
) -> QuadResult:
    """Integrate ``f`` over ``(lo, hi)``; ``hi`` may be ``+inf``.

    ``scale`` is the width of the region where ``f`` carries its mass; a
    half-line is split at ``lo + scale`` and the remainder is mapped onto
    ``(0, 1]``.  Non-convergence is reported through ``converged=False``.
    """
    spec = spec or QuadSpec()
    lo = float(lo)
    hi = float(hi)
    if math.isnan(lo) or math.isnan(hi):
        raise ValueError("integration limits must not be NaN")
    if hi == lo:
        return QuadResult(0.0, 0.0, True)
    if hi < lo:
        r = integrate(f, hi, lo, spec.with_singular(spec.singular_right, spec.singular_left), scale=scale)
        return QuadResult(-r.value, r.error_estimate, r.converged)
    if not scale > 0:
        raise ValueError("scale must be positive")
    if lo == -math.inf and hi == math.inf:
        left = integrate(lambda t: f(-t), 0.0, math.inf, spec.with_singular(), scale=scale)
        right = integrate(f, 0.0, math.inf, spec.with_singular(), scale=scale)
        return _combine([left, right], spec)
    if lo == -math.inf:
        flipped = spec.with_singular(left=spec.singular_right, right=False)
        return integrate(lambda t: f(-t), -hi, math.inf, flipped, scale=scale)

    pieces = []
    if hi == math.inf:
        m = lo + scale
        pieces.append(_finite_piece(f, lo, m, spec.singular_left, False))
        pieces.append(_tail_piece(f, m, scale))
    else:
        pieces.append(_finite_piece(f, lo, hi, spec.singular_left, spec.singular_right))

    share = 1.0 / len(pieces)
    results = []
    for g, a, b in pieces:
        value, err, ier, _ = _quad(g, a, b, spec.abs_tol * share, spec.rel_tol, spec.max_subdivisions)
        results.append(QuadResult(value, err, ier == 0))
    return _combine(results, spec)


def _combine(results: list[QuadResult], spec: QuadSpec) -> QuadResult:
    value = math.fsum(r.value for r in results)
    err = sum(r.error_estimate for r in results)
    ok = all(r.converged for r in results) and err <= max(spec.abs_tol, spec.rel_tol * abs(value))
    return QuadResult(value, err, ok)


def integrate_strict(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    spec: QuadSpec | None = None,
    *,
    scale: float = 1.0,
    what: str = "integral",
) -> float:
    """Like :func:`integrate` but raise :class:`ConvergenceError` on failure."""
    result = integrate(f, lo, hi, spec, scale=scale)
    if not result.converged:
        raise ConvergenceError(
            f"{what} did not converge (value={result.value:.6g}, error={result.error_estimate:.3g})",
            result,
        )
    return result.value


def integrate_log(
    f: Callable[[float], float],
    center: float = 1.0,
    spec: QuadSpec | None = None,
    *,
    what: str = "integral",
) -> float:
    """Integrate ``f`` over ``(0, inf)`` in the variable ``u = log(s / center)``.

    Suited to integrands whose mass is spread over many decades; raises
    :class:`ConvergenceError` on failure.
    """
    if not center > 0:
        raise ValueError("center must be positive")
    spec = (spec or QuadSpec()).with_singular()

    def g(u: float) -> float:
        if u > 300.0 or u < -300.0:
            return 0.0
        s = center * math.exp(u)
        val = f(s)
        return 0.0 if val == 0.0 else val * s

    return integrate_strict(g, -math.inf, math.inf, spec, scale=4.0, what=what)


def gauss_legendre_panels(breaks: np.ndarray, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on the panels ``breaks``."""
    x, w = np.polynomial.legendre.leggauss(order)
    lo = breaks[:-1, None]
    half = 0.5 * np.diff(breaks)[:, None]
    nodes = lo + half * (x[None, :] + 1.0)
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()
