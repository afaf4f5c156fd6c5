"""Datasets behind the four published plots, as (header, rows) tables."""

from __future__ import annotations

import numpy as np

from .linear import PassageProblem, first_passage_density
from .successive import jensen_bound, t2_defect, t2_density, tau2_density

__all__ = ["FIGURE_SLOPES", "figure_table", "peak"]

FIGURE_SLOPES = {
    2: (0.0, -0.5, -1.0),
    3: (-2.0, -1.0, -0.5, 0.0),
}


def _fmt(b: float) -> str:
    return f"{b:g}"


def figure1(slopes=None) -> tuple[list[str], np.ndarray]:
    if slopes is None:
        slopes = np.round(np.arange(-3.0, 0.0 + 1e-9, 0.1), 10)
    rows = []
    for b in slopes:
        p = PassageProblem(0.0, 1.0, float(b))
        rows.append((b, t2_defect(p), jensen_bound(p)))
    return ["b", "defect", "gamma"], np.array(rows)


def _curves(fn, slopes, grid, label):
    cols = [np.asarray(grid, dtype=float)]
    for b in slopes:
        p = PassageProblem(0.0, 1.0, b)
        cols.append(np.array([fn(p, t) for t in grid]))
    header = ["t"] + [f"{label}(b={_fmt(b)})" for b in slopes]
    return header, np.column_stack(cols)


def figure_table(n: int, grid=None) -> tuple[list[str], np.ndarray]:
    """Columns for plot ``n`` (1-4); ``grid`` is the time axis for plots 2-4."""
    if n == 1:
        return figure1()
    if grid is None:
        grid = np.linspace(0.02, 5.0, 250)
    if n == 2:
        return _curves(t2_density, FIGURE_SLOPES[2], grid, "f_T2")
    if n == 3:
        return _curves(tau2_density, FIGURE_SLOPES[3], grid, "f_tau2")
    if n == 4:
        p = PassageProblem(0.0, 1.0, 0.0)
        tau2 = [tau2_density(p, t) for t in grid]
        ig = [first_passage_density(p, t) for t in grid]
        return ["t", "f_tau2", "f_IG"], np.column_stack([grid, tau2, ig])
    raise ValueError(f"figure must be 1, 2, 3 or 4, got {n}")


def peak(values) -> float:
    return float(np.max(values))
