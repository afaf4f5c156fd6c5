"""Verification suites run by ``passage-lab verify``.

The analytic suite checks identities between independent code paths; the
Monte Carlo suite compares simulated estimates against the exact laws at
three standard errors.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtri

from .figures import figure_table
from .linear import (
    PassageProblem,
    first_passage_cdf,
    first_passage_mean,
    last_passage_cdf,
    last_passage_density,
    never_return_probability,
    no_zero_probability,
    salminen_density_numeric,
)
from .mc import (
    McConfig,
    PassageSample,
    estimate_last_passage_cdf,
    estimate_no_zero_probability,
    simulate_euler,
    simulate_first_passage,
)
from .numerics import integrate_log
from .successive import (
    jensen_bound,
    nth_passage_law,
    t1_cdf_driftless,
    t2_defect,
    t2_density,
    t2_partial_mean,
    tau2_density,
)
from .transforms import cir_conjugation, reduce_ou, wright_fisher_conjugation

__all__ = ["Check", "analytic_checks", "ig_quantile", "mc_checks", "run_suite"]

DECILES = tuple(k / 10 for k in range(1, 10))


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _timed(name: str, fn: Callable[[], tuple[bool, str]]) -> Check:
    t0 = time.perf_counter()
    ok, detail = fn()
    return Check(name, bool(ok), detail, time.perf_counter() - t0)


def ig_quantile(p: PassageProblem, q: float) -> float:
    """Quantile of the first-passage law by root-finding on its CDF."""
    hi = 1.0
    while first_passage_cdf(p, hi) < q:
        hi *= 2.0
    return brentq(lambda t: first_passage_cdf(p, t) - q, 0.0 + 1e-300, hi, xtol=1e-13, rtol=1e-13)


def decile_agreement(sample: PassageSample, cdf_times, k: float = 3.0) -> tuple[bool, float]:
    """Worst ``|ecdf - q| / SE`` over the deciles located at ``cdf_times``."""
    worst = 0.0
    for q, t in zip(DECILES, cdf_times):
        e = sample.cdf(t)
        worst = max(worst, abs(e.value - q) / max(e.std_error, 1e-300))
    return worst <= k, worst


# --- analytic ---------------------------------------------------------------


def _last_passage_forms_agree():
    worst = 0.0
    for b in (-2.0, -1.0, -0.5, 0.0):
        for t in (0.5, 1.0, 2.0, 5.0):
            for frac in (0.1, 0.5, 0.9):
                u = frac * t
                worst = max(worst, abs(salminen_density_numeric(b, t, u) - last_passage_density(b, t, u)))
    return worst <= 1e-6, f"max |integral form - closed form| = {worst:.2e}"


def _arcsine():
    worst = 0.0
    for t in (0.5, 1.0, 3.0):
        for u in np.linspace(0.01, 0.99, 25) * t:
            worst = max(worst, abs(last_passage_density(0.0, t, u) - 1.0 / (math.pi * math.sqrt(u * (t - u)))))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def _limit():
    worst = max(abs(no_zero_probability(b, 1.0, 1e6) - never_return_probability(b, 1.0)) for b in (-2.0, -1.0, -0.5))
    return worst <= 1e-3, f"max deviation {worst:.2e}"


def _defect_consistency():
    worst = 0.0
    for b in (-2.0, -1.0, -0.5, -0.1):
        p = PassageProblem(0.0, 1.0, b)
        mass = integrate_log(lambda t: t2_density(p, t), 1.0, what="T2 mass")
        worst = max(worst, abs(1.0 - mass - t2_defect(p)))
    return worst <= 1e-3, f"max |1 - mass - defect| = {worst:.2e}"


def _jensen():
    _, rows = figure_table(1)
    defect, gamma = rows[:, 1], rows[:, 2]
    dominated = bool(np.all(defect <= gamma + 1e-12))
    monotone = bool(np.all(np.diff(defect) < 0))
    vanish = defect[-1] == 0.0 and gamma[-1] == 0.0
    g3 = abs(gamma[0] - 2.0 * (0.5 * math.erfc(-math.sqrt(3.0 / 2.0)) - 0.5))
    ok = dominated and monotone and vanish and g3 < 1e-12
    return ok, f"dominated={dominated} monotone={monotone} vanish_at_0={vanish} gamma(-3)={gamma[0]:.6f}"


def _driftless_mass():
    p = PassageProblem(0.0, 1.0, 0.0)
    m_t2 = integrate_log(lambda t: t2_density(p, t), 1.0, what="T2 mass")
    m_tau2 = integrate_log(lambda t: tau2_density(p, t), 1.0, what="tau2 mass")
    return abs(m_t2 - 1) <= 5e-3 and abs(m_tau2 - 1) <= 5e-3, f"T2 mass {m_t2:.8f}, tau2 mass {m_tau2:.8f}"


def _head():
    p = PassageProblem(0.0, 1.0, 0.0)
    vals = [math.sqrt(t) * t2_density(p, t) for t in (1e-4, 1e-6, 1e-8)]
    spread = (max(vals) - min(vals)) / min(vals)
    return spread < 0.05, f"sqrt(t) f_T2 = {', '.join(f'{v:.6f}' for v in vals)}"


def _recursion():
    p = PassageProblem(0.0, 1.0, 0.0)
    grid = np.geomspace(0.05, 50.0, 400)
    law = nth_passage_law(p, 2, grid)
    direct = np.array([tau2_density(p, t) for t in grid])
    err = float(np.max(np.abs(law.density.values - direct)))
    return err <= 1e-4, f"sup error {err:.2e}"


def _partial_mean():
    p = PassageProblem(0.0, 1.0, 0.0)
    lo, hi = t2_partial_mean(p, 1e2), t2_partial_mean(p, 1e4)
    return hi >= 5 * lo, f"E[min(T2,1e2)]={lo:.4f}, E[min(T2,1e4)]={hi:.4f}, ratio {hi / lo:.2f}"


def _driftless_t1():
    p = PassageProblem(0.0, 1.0, 0.0)
    worst = max(abs(t1_cdf_driftless(p, t) - first_passage_cdf(p, t)) for t in np.geomspace(1e-3, 1e3, 40))
    return worst <= 1e-14, f"max deviation {worst:.2e}"


def _conjugations():
    rng = np.random.default_rng(0)
    path = np.concatenate([[0.0], np.cumsum(rng.standard_normal(2000) * math.sqrt(1e-3))])
    cir = cir_conjugation()
    z = 0.25
    lhs = np.array([cir.v_inverse(w + cir.v(z)) for w in path])
    rhs = 0.25 * (path + 2.0 * math.sqrt(z)) ** 2
    cir_err = float(np.max(np.abs(lhs - rhs)))
    wf = wright_fisher_conjugation()
    wf_path = np.array([wf.v_inverse(w + wf.v(0.3)) for w in path])
    in_unit = bool(np.all((wf_path >= 0) & (wf_path <= 1)))
    ou = reduce_ou(0.0, 1.0, math.sqrt(2.0), 1.0).time_map
    rt = max(abs(ou.rho_inverse(ou.rho(t)) - t) for t in (0.1, 1.0, 5.0))
    ok = cir_err <= 1e-12 and in_unit and rt <= 1e-10
    return ok, f"CIR pathwise {cir_err:.1e}, WF in [0,1]: {in_unit}, OU round trip {rt:.1e}"


def _fig3_order():
    header, rows = figure_table(3)
    peaks = rows[:, 1:].max(axis=0)
    ok = bool(np.all(np.diff(peaks) < 0))
    return ok, "peaks " + ", ".join(f"{h}={v:.4f}" for h, v in zip(header[1:], peaks))


def _fig4_peak():
    _, rows = figure_table(4)
    tau2_peak, ig_peak = rows[:, 1].max(), rows[:, 2].max()
    return tau2_peak > ig_peak, f"tau2 peak {tau2_peak:.4f} vs IG peak {ig_peak:.4f}"


ANALYTIC = {
    "last-passage integral form == closed form": _last_passage_forms_agree,
    "arcsine reduction at b=0": _arcsine,
    "no-zero probability -> never-return limit": _limit,
    "1 - mass(T2) == T2 defect": _defect_consistency,
    "defect <= Jensen bound, monotone in b": _jensen,
    "T2 and tau2 non-defective at b=0": _driftless_mass,
    "sqrt(t) f_T2(t) bounded head": _head,
    "grid recursion n=2 == convolution formula": _recursion,
    "E[T2] diverges at b=0": _partial_mean,
    "driftless T1 CDF == Bachelier-Levy": _driftless_t1,
    "CIR/WF state maps, OU clock inverse": _conjugations,
    "tau2 peak ordering in b": _fig3_order,
    "tau2 peak above IG peak (b=0)": _fig4_peak,
}


def analytic_checks() -> list[Check]:
    return [_timed(name, fn) for name, fn in ANALYTIC.items()]


# --- Monte Carlo ------------------------------------------------------------


def mc_checks(seed: int = 0, paths: int = 100_000) -> list[Check]:
    euler_paths = min(paths, 20_000)
    out = []

    def tau1():
        p = PassageProblem(0.0, 1.0, -1.0)
        s = simulate_first_passage(p, McConfig(n_paths=paths, dt=1e-3, horizon=50.0, seed=seed))
        ok_dec, worst = decile_agreement(s, [ig_quantile(p, q) for q in DECILES])
        m = s.mean()
        ok_mean = m.within(first_passage_mean(p))
        return ok_dec and ok_mean, f"worst decile {worst:.2f} SE, mean {m.value:.4f} +- {m.std_error:.4f}"

    def bridge_needed():
        p = PassageProblem(0.0, 1.0, -1.0)
        s = simulate_first_passage(p, McConfig(n_paths=paths, dt=1e-3, horizon=50.0, seed=seed, bridge=False))
        t_med = ig_quantile(p, 0.5)
        e = s.cdf(t_med)
        return e.value < 0.5 - 3 * e.std_error, f"no-bridge CDF at the median {e.value:.4f} +- {e.std_error:.4f}"

    def arcsine():
        e = estimate_no_zero_probability(0.0, 0.25, 0.75, McConfig(n_paths=paths, dt=1e-3, horizon=1.0, seed=seed))
        return e.within(1.0 / 3.0), f"{e.value:.4f} +- {e.std_error:.4f} vs 1/3"

    def last_passage():
        e = estimate_last_passage_cdf(-1.0, 2.0, 1.0, McConfig(n_paths=paths, dt=1e-3, horizon=2.0, seed=seed))
        exact = last_passage_cdf(-1.0, 2.0, 1.0)
        return e.within(exact), f"{e.value:.4f} +- {e.std_error:.4f} vs {exact:.4f}"

    def ou():
        red = reduce_ou(0.0, 1.0, math.sqrt(2.0), 1.0)
        cfg = McConfig(n_paths=euler_paths, dt=1e-4, horizon=5.0, seed=seed)
        s = simulate_euler("ou", dict(z=0.0, mu=1.0, sigma=math.sqrt(2.0), s0=1.0), cfg)
        times = [red.passage_time(1.0 / ndtri(1.0 - q / 2.0) ** 2) for q in DECILES]
        ok, worst = decile_agreement(s, times)
        return ok, f"worst decile {worst:.2f} SE"

    def cir():
        cfg = McConfig(n_paths=euler_paths, dt=1e-4, horizon=60.0, seed=seed)
        s = simulate_euler("cir", dict(z=0.25, barrier=1.0), cfg)
        target = 1.0 / ndtri(0.75) ** 2
        rel = s.median() / target - 1.0
        return abs(rel) <= 0.05, f"median {s.median():.4f} vs {target:.4f} ({100 * rel:+.1f}%)"

    def determinism():
        p = PassageProblem(0.0, 1.0, -1.0)
        one = simulate_first_passage(p, McConfig(n_paths=20_000, dt=1e-3, horizon=5.0, seed=seed, workers=1))
        many = simulate_first_passage(p, McConfig(n_paths=20_000, dt=1e-3, horizon=5.0, seed=seed, workers=4))
        same = bool(np.array_equal(one.times, many.times))
        return same, "1 worker vs 4 workers bit-identical" if same else "samples differ across worker counts"

    for name, fn in [
        ("tau1 deciles and mean", tau1),
        ("bridge correction removes late bias", bridge_needed),
        ("no zero in (0.25, 1) at b=0", arcsine),
        ("last-passage CDF at b=-1", last_passage),
        ("Euler OU vs clock pushforward", ou),
        ("Euler CIR median vs IG median", cir),
        ("seeded samples independent of workers", determinism),
    ]:
        out.append(_timed(name, fn))
    return out


def run_suite(suite: str, seed: int = 0, paths: int = 100_000) -> list[Check]:
    if suite not in ("analytic", "mc", "all"):
        raise ValueError(f"unknown suite {suite!r}")
    checks = []
    if suite in ("analytic", "all"):
        checks += analytic_checks()
    if suite in ("mc", "all"):
        checks += mc_checks(seed, paths)
    return checks
