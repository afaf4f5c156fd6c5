"""Inter-passage times ``T_n`` and n-th passage times ``tau_n``.

After each visit the path restarts on the boundary, so the next gap
depends on the elapsed time ``s`` only through the no-zero probability of a
path started on the line.  Given ``tau_1 = s`` the density of ``T_2`` is

    k(t | s) = exp(-b^2 (s + t) / 2) sqrt(s) / (pi (s + t) sqrt(t))

and the same kernel drives every later step.  With ``b != 0`` the gaps are
defective: a path may drift away and never return.

All public functions accept problems with the start on either side of the
boundary; the mirror image ``(x, a, b) -> (-x, -a, -b)`` maps the
"start above, slope up" case onto "start below, slope down".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from .linear import (
    PassageProblem,
    first_passage_density,
    never_return_probability,
    no_zero_probability,
)
from .numerics import QuadSpec, gauss_legendre_panels, integrate_log, integrate_strict

__all__ = [
    "DensityGrid",
    "GridResolutionError",
    "NthPassageLaw",
    "jensen_bound",
    "nth_passage_law",
    "t1_cdf_driftless",
    "t2_cdf",
    "t2_conditional_density",
    "t2_defect",
    "t2_density",
    "t2_density_driftless",
    "t2_partial_mean",
    "t2_survival",
    "tau2_density",
    "tn_cdf",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class GridResolutionError(RuntimeError):
    """The grid recursion lost more mass than the analytic atom allows."""


def _canonical(p: PassageProblem) -> PassageProblem:
    p.require_recurrent()
    return p.canonical()


def _bulk_scale(p: PassageProblem) -> float:
    d = p.distance
    if p.b == 0:
        return d * d
    return min(d * d, d / abs(p.b))


def t2_conditional_density(b: float, s: float, t: float) -> float:
    if not (s > 0 and t > 0):
        raise ValueError(f"need s > 0 and t > 0, got s={s}, t={t}")
    return math.exp(-0.5 * b * b * (s + t)) * math.sqrt(s) / (math.pi * (s + t) * math.sqrt(t))


def t2_survival(p: PassageProblem, t: float, spec: QuadSpec | None = None) -> float:
    """``P(T_2 > t)`` including the mass of ``T_2 = +inf``."""
    q = _canonical(p)
    if t < 0 or math.isnan(t):
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0:
        return 1.0
    if math.isinf(t):
        return t2_defect(q, spec)
    spec = spec or QuadSpec()
    inner = spec.with_singular()

    def integrand(s: float) -> float:
        f = first_passage_density(q, s)
        if f == 0.0:
            return 0.0
        return f * no_zero_probability(q.b, s, t, inner)

    return integrate_log(integrand, _bulk_scale(q), spec, what="T2 survival")


def t2_cdf(p: PassageProblem, t: float, spec: QuadSpec | None = None) -> float:
    """``1 - int_0^inf f_tau1(s) int_0^s psi_{s+t}(y) dy ds``."""
    return 1.0 - t2_survival(p, t, spec)


def t2_density(p: PassageProblem, t: float, spec: QuadSpec | None = None) -> float:
    """``int_0^inf f_tau1(s) k(t | s) ds``; behaves like ``const / sqrt(t)`` near 0."""
    q = _canonical(p)
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t}")
    if math.isinf(t):
        return 0.0
    b = q.b

    # t * k(t | s) * sqrt(t) stays O(1) for large t, keeping the tolerance relative
    def integrand(s: float) -> float:
        f = first_passage_density(q, s)
        if f == 0.0:
            return 0.0
        return f * math.exp(-0.5 * b * b * s) * math.sqrt(s) * t / (s + t)

    scaled = integrate_log(integrand, _bulk_scale(q), spec, what="T2 density")
    return math.exp(-0.5 * b * b * t) / (math.pi * t * math.sqrt(t)) * scaled


def t2_density_driftless(p: PassageProblem, t: float, spec: QuadSpec | None = None) -> float:
    """Zero-slope form of the ``T_2`` density with the IG factor written out."""
    q = _canonical(p)
    if q.b != 0:
        raise ValueError("t2_density_driftless requires b == 0")
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t}")
    spec = (spec or QuadSpec()).with_singular()
    d = q.distance
    rt = math.sqrt(t)

    def integrand(s: float) -> float:
        return d / (_SQRT_2PI * s) * math.exp(-d * d / (2.0 * s)) / (math.pi * (s + t) * rt)

    return integrate_strict(integrand, 0.0, math.inf, spec, scale=d * d, what="T2 density (b=0)")


def t2_defect(p: PassageProblem, spec: QuadSpec | None = None) -> float:
    """``P(T_2 = +inf) = E[2 sgn(b) (Phi(b sqrt(tau_1)) - 1/2)]``."""
    q = _canonical(p)
    if q.b == 0:
        return 0.0
    spec = (spec or QuadSpec()).with_singular()
    b = q.b

    def integrand(s: float) -> float:
        f = first_passage_density(q, s)
        return 0.0 if f == 0.0 else f * never_return_probability(b, s)

    return integrate_log(integrand, _bulk_scale(q), spec, what="T2 defect")


def jensen_bound(p: PassageProblem) -> float:
    """Upper bound on the ``T_2`` defect from Jensen's inequality (even in ``b``)."""
    p.require_recurrent()
    if p.b == 0:
        return 0.0
    mean = p.distance / abs(p.b)
    return never_return_probability(p.b, mean)


def tau2_density(p: PassageProblem, t: float, spec: QuadSpec | None = None) -> float:
    """Density of ``tau_2 = tau_1 + T_2`` by direct convolution."""
    q = _canonical(p)
    if not t > 0:
        raise ValueError(f"t must be > 0, got {t}")
    if math.isinf(t):
        return 0.0
    spec = (spec or QuadSpec()).with_singular(left=True, right=True)
    d = q.distance
    b = q.b

    def integrand(s: float) -> float:
        if s <= 0.0 or s >= t:
            return 0.0
        z = d + b * s
        return d / (_SQRT_2PI * s * math.sqrt(t - s)) * math.exp(-z * z / (2.0 * s))

    inner = integrate_strict(integrand, 0.0, t, spec, what="tau2 convolution")
    return math.exp(-0.5 * b * b * t) / (math.pi * t) * inner


def t2_partial_mean(p: PassageProblem, horizon: float, spec: QuadSpec | None = None) -> float:
    """``int_0^horizon P(T_2 > t) dt``; grows without bound when ``b = 0``."""
    q = _canonical(p)
    if q.b != 0:
        raise ValueError("t2_partial_mean is defined for b == 0 only")
    if math.isnan(horizon) or horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    if horizon == 0:
        return 0.0
    spec = spec or QuadSpec()
    outer = spec.with_singular(left=True)
    return integrate_strict(lambda t: t2_survival(q, t, spec), 0.0, horizon, outer, what="T2 partial mean")


def t1_cdf_driftless(p: PassageProblem, t: float) -> float:
    """``2 (1 - Phi((a - x) / sqrt(t)))`` for a constant barrier."""
    p.require_off_boundary()
    if p.b != 0:
        raise ValueError("t1_cdf_driftless requires b == 0")
    if math.isnan(t) or t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0:
        return 0.0
    if math.isinf(t):
        return 1.0
    return math.erfc(p.distance / math.sqrt(2.0 * t))


# --- grid recursion ---------------------------------------------------------


@dataclass(frozen=True)
class DensityGrid:
    """Tabulated density with a declared ``t**left_exponent`` head at zero."""

    abscissae: np.ndarray
    values: np.ndarray
    left_exponent: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.abscissae, dtype=float)
        f = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "abscissae", t)
        object.__setattr__(self, "values", f)
        if t.ndim != 1 or t.shape != f.shape or t.size < 2:
            raise ValueError("abscissae and values must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(t) <= 0) or t[0] <= 0:
            raise ValueError("abscissae must be positive and strictly increasing")
        if np.any(f < 0) or not np.all(np.isfinite(f)):
            raise ValueError("density values must be finite and nonnegative")
        if self.left_exponent <= -1:
            raise ValueError("left_exponent must exceed -1 for an integrable head")

    def mass(self) -> float:
        """Trapezoid mass (in ``log t``) plus the analytic head ``(0, t_0)``."""
        t, f = self.abscissae, self.values
        head = f[0] * t[0] / (1.0 + self.left_exponent)
        return float(head + trapezoid(f * t, np.log(t)))

    def interpolant(self):
        """Cubic spline in ``log t``; zero below the grid."""
        spline = CubicSpline(np.log(self.abscissae), self.values)
        lo = self.abscissae[0]

        def f(s):
            s = np.asarray(s, dtype=float)
            out = np.zeros_like(s)
            ok = s >= lo
            out[ok] = np.maximum(spline(np.log(s[ok])), 0.0)
            return out

        return f


@dataclass(frozen=True)
class NthPassageLaw:
    """Law of ``tau_n``: density on the requested grid plus atom at infinity.

    ``support`` holds the internal working grid the recursion ran on; it
    reaches far into the tail and is what mass and CDF computations use.
    """

    n: int
    density: DensityGrid
    atom_at_infinity: float
    support: DensityGrid = field(repr=False)
    b: float = 0.0

    def tail_mass(self) -> float:
        """Mass beyond the support grid from the asymptotic tail shape."""
        t = self.support.abscissae
        f = self.support.values
        if f[-1] == 0.0:
            return 0.0
        if self.b != 0:
            return 2.0 * f[-1] / (self.b * self.b)
        # b = 0: f(t) t^{3/2} is a polynomial of degree n-1 in log t asymptotically
        j = int(np.searchsorted(t, t[-1] / 100.0))
        degree = self.n - 1
        if t.size - j <= degree + 2:
            return 2.0 * t[-1] * f[-1]
        coef = np.polynomial.polynomial.polyfit(np.log(t[j:]), f[j:] * t[j:] ** 1.5, degree)
        big_l = math.log(t[-1])
        tail = 0.0
        moment = 0.0
        for k, c in enumerate(coef):
            # int_T^inf (log t)^k t^{-3/2} dt = 2 T^{-1/2} (log T)^k + 2 k * previous
            moment = 2.0 * big_l**k / math.sqrt(t[-1]) + 2.0 * k * moment
            tail += c * moment
        return max(tail, 0.0)

    def finite_mass(self) -> float:
        return self.support.mass() + self.tail_mass()


def _working_grid(p: PassageProblem, requested: np.ndarray, points: int) -> np.ndarray:
    d = p.distance
    t_max = 1e6 * (d * d if p.b == 0 else d / abs(p.b))
    lo = min(1e-4 * d * d, requested[0])
    hi = max(t_max, requested[-1])
    return np.geomspace(lo, hi, points)


def _convolve(prev, s_min: float, b: float, t: np.ndarray, order: int = 16) -> np.ndarray:
    """``f_n(t) = e^{-b^2 t/2} (2/pi) int_0^{pi/2} sin^2(th) f_{n-1}(t sin^2 th) dth``."""
    out = np.empty_like(t)
    for i, ti in enumerate(t):
        if ti <= s_min:
            out[i] = 0.0
            continue
        th_lo = math.asin(math.sqrt(s_min / ti))
        n_panels = max(4, int(math.ceil(math.log(0.5 * math.pi / th_lo) / math.log(1.5))))
        breaks = np.concatenate(([th_lo], th_lo * np.geomspace(1.0, 0.5 * math.pi / th_lo, n_panels + 1)[1:]))
        nodes, weights = gauss_legendre_panels(breaks, order)
        sn = np.sin(nodes)
        out[i] = (2.0 / math.pi) * np.dot(weights, sn * sn * prev(ti * sn * sn))
    return np.exp(-0.5 * b * b * t) * out


def nth_passage_law(
    p: PassageProblem,
    n: int,
    grid,
    spec: QuadSpec | None = None,
    *,
    working_points: int = 2048,
    tolerance: float = 1e-2,
) -> NthPassageLaw:
    """Density of the n-th passage time on ``grid`` by repeated convolution.

    Each step convolves the previous law with the restart kernel
    :func:`t2_conditional_density` on a log-spaced working grid that spans
    the singular head and the heavy tail.  The atom at infinity is one
    minus the tail-corrected grid mass; it is cross-checked against the
    never-return integral and :class:`GridResolutionError` is raised when
    the two disagree by more than ``tolerance``.
    """
    q = _canonical(p)
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    requested = np.asarray(grid, dtype=float)
    if requested.ndim != 1 or requested.size < 2 or np.any(np.diff(requested) <= 0) or requested[0] <= 0:
        raise ValueError("grid must be positive and strictly increasing with >= 2 points")
    spec = spec or QuadSpec()
    work = _working_grid(q, requested, working_points)

    def ig(t):
        return np.array([first_passage_density(q, ti) for ti in t])

    current = NthPassageLaw(1, DensityGrid(requested, ig(requested)), 0.0, DensityGrid(work, ig(work)), q.b)
    if n == 1:
        return current
    for k in range(2, n + 1):
        prev = current.support.interpolant()
        if k == 2:
            analytic_atom = t2_defect(q, spec)
        else:
            analytic_atom = 1.0 - _return_mass(current, q.b)
        support = DensityGrid(work, _convolve(prev, work[0], q.b, work))
        values = _convolve(prev, work[0], q.b, requested) if k == n else requested
        current = NthPassageLaw(k, DensityGrid(requested, values), 0.0, support, q.b)
        grid_atom = 1.0 - current.finite_mass()
        if abs(grid_atom - analytic_atom) > tolerance:
            raise GridResolutionError(
                f"n={k}: grid atom {grid_atom:.4g} differs from analytic atom {analytic_atom:.4g}"
            )
        atom = 0.0 if q.b == 0 else min(1.0, max(0.0, grid_atom))
        current = NthPassageLaw(k, current.density, atom, support, q.b)
    return current


def _return_mass(law: NthPassageLaw, b: float) -> float:
    """``int f_{tau_{n-1}}(s) (1 - never_return(b, s)) ds`` on the support grid."""
    t = law.support.abscissae
    f = law.support.values
    if b == 0:
        return law.finite_mass()
    ret = 1.0 - np.array([never_return_probability(b, s) for s in t])
    head = f[0] * ret[0] * t[0]
    return float(head + trapezoid(f * ret * t, np.log(t)))


def tn_cdf(
    p: PassageProblem,
    n: int,
    t: float,
    spec: QuadSpec | None = None,
    *,
    previous: NthPassageLaw | None = None,
) -> float:
    """``P(T_n <= t)`` from the grid law of ``tau_{n-1}``.

    When ``tau_{n-1}`` is itself defective, only its finite part can start
    another gap, so the result is ``P(tau_{n-1} < inf) - int f NZ``.
    """
    q = _canonical(p)
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n}")
    if math.isnan(t) or t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0:
        return 0.0
    if previous is None:
        previous = nth_passage_law(q, n - 1, np.geomspace(1e-2, 1e2, 16), spec)
    if previous.n != n - 1:
        raise ValueError(f"previous law has n={previous.n}, expected {n - 1}")
    inner = (spec or QuadSpec()).with_singular()
    s = previous.support.abscissae
    f = previous.support.values
    if math.isinf(t):
        nz = np.array([never_return_probability(q.b, si) for si in s])
    else:
        nz = np.array([no_zero_probability(q.b, si, t, inner) if fi > 0 else 0.0 for si, fi in zip(s, f)])
    finite = previous.finite_mass()
    stay = float(f[0] * nz[0] * s[0] + trapezoid(f * nz * s, np.log(s))) + previous.tail_mass() * nz[-1]
    return min(1.0, max(0.0, finite - stay))
