"""Write the CSV data for all four figures and summarise their shape claims.

    python3 scripts/reproduce_figures.py --outdir figures/
"""

import argparse
from pathlib import Path

import numpy as np

from passage_lab.cli import main as cli_main


def load(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return lines[0].split(","), np.loadtxt(lines[1:], delimiter=",", ndmin=2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", type=Path, default=Path("figures"))
    ap.add_argument("--points", type=int, default=250)
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    for n in (1, 2, 3, 4):
        out = args.outdir / f"figure{n}.csv"
        argv = ["figure", "--n", str(n), "--out", str(out)]
        if n > 1:
            argv += ["--points", str(args.points)]
        if cli_main(argv) != 0:
            raise SystemExit(f"figure {n} failed")
        header, rows = load(out)
        print(f"{out}: {rows.shape[0]} rows, columns {header}")
        if n == 1:
            b, defect, gamma = rows.T
            print(f"  defect <= gamma everywhere: {bool(np.all(defect <= gamma))}")
            for bi, d, g in rows[::5]:
                print(f"  b={bi:+.1f}  defect={d:.4f}  gamma={g:.4f}")
        else:
            for name, col in zip(header[1:], rows[:, 1:].T):
                k = int(np.argmax(col))
                print(f"  {name:<16} peak {col[k]:.4f} at t={rows[k, 0]:.3f}")


if __name__ == "__main__":
    main()
