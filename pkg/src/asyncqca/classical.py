"""Classical limit: stochastic cellular-automaton sampling and the
continuous-time contact-process reduction.

At lam = 0 the quantum channel closes on diagonal states and reduces to a
probabilistic cellular automaton whose per-site occupation probabilities are
read off the gate parameters. This module provides the sampler, the exact
small-L transition matrix (used as an oracle against the quantum simulator),
and the contact-process mean-field ODE obtained in the small-time-step limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .params import GateParams


@dataclass(frozen=True)
class CPRates:
    kappa_c: float
    kappa_b: float
    gamma: float
    dt: float
    negative_kc: bool = False  # mapping left the physical rate family


def target_occupation_prob(left: int, center: int, right: int,
                           params: GateParams) -> float:
    """Probability that the target becomes occupied, by neighborhood class."""
    if left == 0 and right == 0:
        return params.q_dec if center else 0.0
    return params.p_coag if center else params.p_branch


def _site_probs(rows: np.ndarray, params: GateParams, boundary: str) -> np.ndarray:
    """Vectorized target probabilities for an array of rows [..., L]."""
    if boundary == "Periodic":
        left = np.roll(rows, 1, axis=-1)
        right = np.roll(rows, -1, axis=-1)
    elif boundary == "FixedEmpty":
        pad = np.zeros(rows.shape[:-1] + (1,), dtype=rows.dtype)
        left = np.concatenate([pad, rows[..., :-1]], axis=-1)
        right = np.concatenate([rows[..., 1:], pad], axis=-1)
    else:
        raise ValueError(f"unknown boundary {boundary!r}")
    isolated = (left == 0) & (right == 0)
    occ = rows == 1
    return np.where(
        isolated,
        np.where(occ, params.q_dec, 0.0),
        np.where(occ, params.p_coag, params.p_branch),
    )


def pca_step(row: np.ndarray, params: GateParams, boundary: str,
             rng: np.random.Generator) -> np.ndarray:
    """Synchronous update: all targets read the frozen parent row."""
    probs = _site_probs(row, params, boundary)
    return (rng.random(row.shape) < probs).astype(np.int64)


def transition_matrix(L: int, params: GateParams, boundary: str = "FixedEmpty") -> np.ndarray:
    """Exact 2^L x 2^L row-to-row transition matrix, M[new, old].

    Bit order matches the quantum simulator: site 0 is the most significant
    bit of the basis index.
    """
    if L > 12:
        raise ValueError("transition matrix limited to L <= 12")
    d = 2 ** L
    states = ((np.arange(d)[:, None] >> (L - 1 - np.arange(L))) & 1)
    probs = _site_probs(states, params, boundary)          # [old, L]
    new_bits = states[:, None, :]                          # [new, 1, L]
    m = np.where(new_bits == 1, probs[None, :, :], 1.0 - probs[None, :, :])
    return m.prod(axis=-1)                                 # [new, old]


@dataclass
class SampleStatistics:
    t: np.ndarray
    density: np.ndarray
    density_err: np.ndarray
    survival: np.ndarray
    survival_err: np.ndarray
    trials: int


def sample_statistics(L: int, T: int, trials: int, params: GateParams,
                      initial: str | np.ndarray, rng_seed: int = 0,
                      boundary: str = "FixedEmpty") -> SampleStatistics:
    """Trial-averaged density and survival probability time series.

    Survival means at least one occupied site. All trials evolve in one
    vectorized batch from a counter-based generator, so results are
    deterministic given the seed.
    """
    if isinstance(initial, str):
        from .exact import parse_pattern
        init = parse_pattern(initial)
    else:
        init = np.asarray(initial, dtype=np.int64)
    if init.shape != (L,):
        raise ValueError("initial row length mismatch")
    rng = np.random.Generator(np.random.Philox(rng_seed))
    rows = np.tile(init, (trials, 1))
    dens = np.empty((T + 1, trials))
    surv = np.empty((T + 1, trials))
    dens[0] = rows.mean(axis=1)
    surv[0] = (rows.any(axis=1)).astype(float)
    for t in range(1, T + 1):
        alive = rows.any(axis=1)
        if alive.any():
            rows[alive] = pca_step(rows[alive], params, boundary, rng)
        dens[t] = rows.mean(axis=1)
        surv[t] = (rows.any(axis=1)).astype(float)
    return SampleStatistics(
        t=np.arange(T + 1),
        density=dens.mean(axis=1),
        density_err=dens.std(axis=1, ddof=1) / np.sqrt(trials) if trials > 1 else np.zeros(T + 1),
        survival=surv.mean(axis=1),
        survival_err=surv.std(axis=1, ddof=1) / np.sqrt(trials) if trials > 1 else np.zeros(T + 1),
        trials=trials,
    )


def ct_rates_from_probs(params: GateParams, dt: float) -> CPRates:
    """Small-time-step reading of the flip probabilities as Poisson rates."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    kappa_c = (params.q_dec - params.p_coag) / dt
    return CPRates(
        kappa_c=kappa_c,
        kappa_b=params.p_branch / dt,
        gamma=params.p_dec / dt,
        dt=dt,
        negative_kc=kappa_c < 0,
    )


@dataclass
class CPMeanFieldResult:
    t: np.ndarray
    n: np.ndarray
    stationary_roots: tuple  # real fixed points in [0, 1], absorbing root first


def cp_mf_rhs(n: float, rates: CPRates) -> float:
    k_tot = rates.kappa_b + rates.kappa_c
    return -rates.gamma * n + (1.0 - (1.0 - n) ** 2) * (rates.kappa_b - k_tot * n)


def cp_stationary_roots(rates: CPRates) -> tuple:
    """Roots of the fixed-point condition; n = 0 is always absorbing.

    Nonzero fixed points solve K n^2 - (2K + kappa_b) n + (2 kappa_b - gamma) = 0
    with K = kappa_b + kappa_c.
    """
    k = rates.kappa_b + rates.kappa_c
    roots = [0.0]
    coeffs = np.array([k, -(2.0 * k + rates.kappa_b), 2.0 * rates.kappa_b - rates.gamma])
    if abs(coeffs[0]) < 1e-300:
        candidates = [-coeffs[2] / coeffs[1]] if abs(coeffs[1]) > 0 else []
    else:
        candidates = [r.real for r in np.roots(coeffs) if abs(r.imag) < 1e-12]
    roots += [r for r in candidates if -1e-12 <= r <= 1.0 + 1e-12]
    return tuple(sorted(set(round(r, 15) for r in roots)))


def cp_mf_ode(rates: CPRates, n0: float, t_max: float, dt_int: float = 0.01) -> CPMeanFieldResult:
    if not (0.0 <= n0 <= 1.0):
        raise ValueError("initial density outside [0, 1]")
    ts = np.arange(0.0, t_max + 0.5 * dt_int, dt_int)
    sol = solve_ivp(
        lambda t, v: [cp_mf_rhs(v[0], rates)], (0.0, ts[-1]), [n0],
        t_eval=ts, rtol=1e-10, atol=1e-12,
    )
    n = sol.y[0]
    if n.min() < -1e-9 or n.max() > 1.0 + 1e-9:
        raise RuntimeError("density left [0, 1] during integration")
    return CPMeanFieldResult(t=sol.t, n=np.clip(n, 0.0, 1.0),
                             stationary_roots=cp_stationary_roots(rates))
