"""Monte Carlo estimates next to the exact values, with z-scores.

    python3 scripts/mc_crosscheck.py --paths 100000 --seed 7
"""

import argparse
import math
import time

from scipy import stats

from passage_lab.linear import PassageProblem, first_passage_cdf, last_passage_cdf, no_zero_probability
from passage_lab.mc import McConfig, estimate_last_passage_cdf, estimate_no_zero_probability, simulate_euler, simulate_first_passage
from passage_lab.transforms import reduce_ou


def row(label, est, exact):
    z = (est.value - exact) / est.std_error if est.std_error > 0 else 0.0
    print(f"{label:<42} {est.value:9.5f} +- {est.std_error:7.5f}   exact {exact:9.5f}   z {z:+6.2f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--euler", action="store_true", help="also run the (slow) Euler OU/CIR checks")
    args = ap.parse_args()
    cfg = McConfig(n_paths=args.paths, dt=1e-3, horizon=50.0, seed=args.seed)
    t0 = time.perf_counter()

    p = PassageProblem(0.0, 1.0, -1.0)
    s = simulate_first_passage(p, cfg)
    for q in (0.1, 0.5, 0.9):
        t = stats.invgauss(mu=1.0, scale=1.0).ppf(q)
        row(f"P(tau1 <= {t:.3f}), b=-1", s.cdf(t), first_passage_cdf(p, t))
    row("E[tau1], b=-1", s.mean(), 1.0)

    for b, sv, gap in [(0.0, 0.25, 0.75), (-0.5, 1.0, 2.0), (-1.0, 1.0, 20.0)]:
        e = estimate_no_zero_probability(b, sv, gap, McConfig(n_paths=args.paths, dt=1e-2, horizon=1.0, seed=args.seed))
        row(f"no zero in ({sv}, {sv + gap}), b={b}", e, no_zero_probability(b, sv, gap))
    e = estimate_last_passage_cdf(-1.0, 2.0, 1.0, McConfig(n_paths=args.paths, dt=1e-3, horizon=2.0, seed=args.seed))
    row("last visit before 2 is <= 1, b=-1", e, last_passage_cdf(-1.0, 2.0, 1.0))

    if args.euler:
        n = min(args.paths, 20_000)
        red = reduce_ou(0.0, 1.0, math.sqrt(2.0), 1.0)
        ou = simulate_euler("ou", dict(z=0.0, mu=1.0, sigma=math.sqrt(2.0), s0=1.0), McConfig(n_paths=n, dt=1e-4, horizon=5.0, seed=args.seed))
        for t in (0.2, 0.5, 1.0):
            row(f"OU: P(tau <= {t})", ou.cdf(t), first_passage_cdf(red.bm_problem, red.time_map.rho(t)))
        cir = simulate_euler("cir", dict(z=0.25, barrier=1.0), McConfig(n_paths=n, dt=1e-4, horizon=60.0, seed=args.seed))
        target = stats.levy.median()
        print(f"{'CIR median vs BM(1 -> 2) median':<42} {cir.median():9.5f}   exact {target:9.5f}   rel {cir.median() / target - 1:+.3f}")
        print(f"{'CIR updates projected onto [0, inf)':<42} {cir.clamped_steps}")
    print(f"[{time.perf_counter() - t0:.1f}s]")


if __name__ == "__main__":
    main()
