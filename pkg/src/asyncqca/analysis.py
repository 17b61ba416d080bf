"""Phase-diagram sweeps, transition classification, and the critical line.

All dynamical content comes from the mean-field module; this layer only
organizes grids, detects the absorbing/active boundary, and classifies the
transition order from jump and hysteresis detectors.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .meanfield import MFState, kernel_tables, iterate_tables
from .params import GateParams
from .qcp import UndefinedRatioError, g_ratio


class BracketError(ValueError):
    """The classification does not differ across the requested bracket."""


class FitInvalidError(RuntimeError):
    """Onset-exponent fit rejected (discontinuous or absorbing onset)."""


@dataclass
class PhaseDiagram:
    lambda_grid: np.ndarray
    p_branch_grid: np.ndarray
    n_inf: np.ndarray          # [lambda, p_branch]
    init_label: str
    iters: int
    base_params: GateParams

    def __post_init__(self):
        assert self.n_inf.shape == (len(self.lambda_grid), len(self.p_branch_grid))


@dataclass(frozen=True)
class TransitionReport:
    lam: float
    p_c: Optional[float]
    order: str                 # "Continuous" | "FirstOrder"
    jump: float
    hysteresis: float


def _row_tables(base_params: GateParams, lam: float, p_grid: np.ndarray) -> np.ndarray:
    plist = [base_params.with_branch(float(p)).with_lam(float(lam)) for p in p_grid]
    return kernel_tables(plist)


def _stationary_row(base_params, lam, p_grid, iters, init: MFState) -> np.ndarray:
    tabs = _row_tables(base_params, lam, p_grid)
    n, _, _ = iterate_tables(tabs, init.n, init.x, init.y, iters=iters)
    return n


def sweep(base_params: GateParams, lambda_grid: Sequence[float],
          p_grid: Sequence[float], iters: int = 1000,
          init: MFState = MFState(1.0), threads: int = 1) -> PhaseDiagram:
    """Stationary density on the full (lambda, p_branch) grid.

    Rows are independent; with threads > 1 they are computed concurrently and
    always assembled in index order, so the result is schedule-independent.
    """
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    p_grid = np.asarray(p_grid, dtype=float)
    if lambda_grid.size == 0 or p_grid.size == 0:
        raise ValueError("empty grid")
    init.validate()

    def row(i):
        return _stationary_row(base_params, lambda_grid[i], p_grid, iters, init)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, range(len(lambda_grid))))
    else:
        rows = [row(i) for i in range(len(lambda_grid))]
    label = f"n={init.n:g},x={init.x:g},y={init.y:g}"
    return PhaseDiagram(lambda_grid, p_grid, np.stack(rows), label, iters, base_params)


def _level_crossing(p_grid: np.ndarray, n: np.ndarray, level: float) -> Optional[float]:
    """First upward crossing of `level` along the branch, linearly interpolated."""
    above = n >= level
    if not above.any():
        return None
    i = int(np.argmax(above))
    if i == 0:
        return float(p_grid[0])
    p0, p1, n0, n1 = p_grid[i - 1], p_grid[i], n[i - 1], n[i]
    if n1 == n0:
        return float(p1)
    return float(p0 + (level - n0) * (p1 - p0) / (n1 - n0))


def classify_transition(lam: float, base_params: GateParams,
                        p_resolution: float = 1e-3,
                        jump_threshold: float = 0.05,
                        hysteresis_threshold: float = 0.05,
                        iters: int = 1000) -> TransitionReport:
    """Jump + two-initial-condition hysteresis detectors along a p_branch scan."""
    p_grid = np.arange(0.0, 1.0 + 0.5 * p_resolution, p_resolution)
    tabs = _row_tables(base_params, lam, p_grid)
    hi, _, _ = iterate_tables(tabs, 1.0, iters=iters)
    lo, _, _ = iterate_tables(tabs, 1e-3, iters=iters)
    jump = float(np.abs(np.diff(hi)).max())
    hyst = float(np.abs(hi - lo).max())
    order = "FirstOrder" if (jump > jump_threshold or hyst > hysteresis_threshold) else "Continuous"
    return TransitionReport(lam=float(lam), p_c=_level_crossing(p_grid, hi, 0.1),
                            order=order, jump=jump, hysteresis=hyst)


def find_lambda_star(base_params: GateParams, bracket=(0.8, 1.0),
                     tol: float = 5e-3, **classify_kwargs) -> float:
    """Bisection on the order classification over the lam bracket."""
    lo, hi = float(bracket[0]), float(bracket[1])
    c_lo = classify_transition(lo, base_params, **classify_kwargs)
    c_hi = classify_transition(hi, base_params, **classify_kwargs)
    if c_lo.order == c_hi.order:
        raise BracketError(
            f"classification is {c_lo.order} at both bracket endpoints {bracket}"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if classify_transition(mid, base_params, **classify_kwargs).order == c_lo.order:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_contour(base_params: GateParams, lambda_values: Sequence[float],
                     level: float = 0.1, iters: int = 1000,
                     p_tol: float = 1e-4, coarse: int = 101):
    """p_branch at which the stationary density crosses `level`, per lam.

    Returns a list of (lam, p_c or None); missing brackets are gap-marked.
    Bisection refines on the high-density-branch stationary density.
    """
    out = []
    for lam in lambda_values:
        p_grid = np.linspace(0.0, 1.0, coarse)
        n = _stationary_row(base_params, lam, p_grid, iters, MFState(1.0))
        crossing = None
        above = n >= level
        if above.any() and not above[0]:
            i = int(np.argmax(above))
            lo_p, hi_p = p_grid[i - 1], p_grid[i]
            while hi_p - lo_p > p_tol:
                mid = 0.5 * (lo_p + hi_p)
                nm = _stationary_row(base_params, lam, np.array([mid]), iters,
                                     MFState(1.0))[0]
                if nm >= level:
                    hi_p = mid
                else:
                    lo_p = mid
            crossing = 0.5 * (lo_p + hi_p)
        elif above.all():
            crossing = 0.0
        out.append((float(lam), crossing))
    return out


def g_along_critical(base_params: GateParams, lambda_values: Sequence[float],
                     level: float = 0.1, iters: int = 1000):
    """Table of (lam, p_c, g at the critical point); gaps where no contour."""
    table = []
    for lam, p_c in critical_contour(base_params, lambda_values, level, iters):
        if p_c is None or p_c <= 0.0:
            table.append((lam, p_c, None))
            continue
        params = base_params.with_branch(p_c).with_lam(lam)
        try:
            table.append((lam, p_c, g_ratio(params)))
        except UndefinedRatioError:
            # fully asynchronous endpoint: classical branching vanishes
            table.append((lam, p_c, None))
    return table


def fit_mf_beta(lam: float, base_params: GateParams,
                window=(1e-3, 1e-2), n_points: int = 12,
                max_iters: int = 400_000) -> float:
    """Log-log onset slope of the stationary density just above threshold.

    The fit needs the true threshold (not the plotting contour) and converged
    densities, so the branch is iterated to a fixed-point tolerance and the
    threshold is located by extrapolating the converged branch to zero.
    Discontinuous onsets are rejected.
    """
    report = classify_transition(lam, base_params)
    if report.order != "Continuous":
        raise FitInvalidError(f"onset at lam={lam} is discontinuous")
    if report.p_c is None:
        raise FitInvalidError(f"no active phase found at lam={lam}")
    # locate the threshold: converge the map on a fine local grid
    p_lo = max(0.0, report.p_c - 0.12)
    p_hi = min(1.0, report.p_c + 0.02)
    grid = np.linspace(p_lo, p_hi, 141)
    n_grid = _converged_row(base_params, lam, grid, max_iters)
    alive = n_grid > 1e-8
    if not alive.any() or alive.all():
        raise FitInvalidError("threshold not bracketed by the local grid")
    i = int(np.argmax(alive))
    # linear extrapolation of the active branch to zero density
    j = min(i + 3, len(grid) - 1)
    slope_lin = (n_grid[j] - n_grid[i]) / (grid[j] - grid[i])
    p_c = grid[i] - n_grid[i] / slope_lin if slope_lin > 0 else grid[i]
    deltas = np.geomspace(window[0], window[1], n_points)
    ps = p_c + deltas
    ps = ps[ps <= 1.0]
    n_fit = _converged_row(base_params, lam, ps, max_iters)
    good = n_fit > 0
    if good.sum() < 4:
        raise FitInvalidError("window extends into the absorbing phase")
    slope, _ = np.polyfit(np.log(ps[good] - p_c), np.log(n_fit[good]), 1)
    return float(slope)


def _converged_row(base_params, lam, p_grid, max_iters, tol=1e-13,
                   block: int = 2000) -> np.ndarray:
    tabs = _row_tables(base_params, lam, np.asarray(p_grid, float))
    n = np.full(len(p_grid), 1.0)
    x = np.zeros(len(p_grid))
    y = np.zeros(len(p_grid))
    done = 0
    while done < max_iters:
        n2, x, y = iterate_tables(tabs, n, x, y, iters=block)
        delta = np.abs(n2 - n).max()
        n = n2
        done += block
        if delta < tol:
            break
    return n
