"""Homogeneous product-ansatz mean field for the asynchronous automaton.

Single site of the new row, described by (n, x, y). The update conjugates the
empty target state by the branch kernels of the local gate and weights each
branch by the product-ansatz expectations of the controls; the projector onto
"both outer neighbors empty" contributes <P> = (1-n)^2 since it is diagonal.

The scalar density recursion uses the closed coefficient set (r_dec, r_coag,
r_branch, r_star). Note: r_star below is the coefficient actually carried by
the 16x16 gate, extracted by brute force; a superficially similar closed form
with the opposite sign on the p_coag terms circulates but does not match the
gate at generic parameters (the two agree when p_coag == p_plus).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gates import NBAR, NUM, SX, SY, flip_unitary
from .params import GateParams


class MeanFieldError(RuntimeError):
    """State invariant violated during iteration (indicates a bug)."""


@dataclass(frozen=True)
class MFState:
    n: float
    x: float = 0.0
    y: float = 0.0

    def validate(self, tol: float = 1e-9) -> "MFState":
        r2 = self.x ** 2 + self.y ** 2 + (2.0 * self.n - 1.0) ** 2
        if not (-tol <= self.n <= 1.0 + tol) or r2 > 1.0 + tol:
            raise MeanFieldError(f"invalid single-site state {self}")
        return self

    def as_matrix(self) -> np.ndarray:
        sp = 0.5 * (self.x + 1j * self.y)  # equals Tr(rho s+), the [emp, occ] entry
        return np.array([[1.0 - self.n, sp], [np.conj(sp), self.n]])


@dataclass(frozen=True)
class MFCoefficients:
    r_dec: float
    r_coag: float
    r_branch: float
    r_star: float


def coefficients(params: GateParams) -> MFCoefficients:
    """Closed form of the four density-recursion coefficients."""
    lam = params.lam
    pb, qb = params.p_branch, params.q_branch
    pc, qc = params.p_coag, params.q_coag
    p, q = params.p_plus, params.q_plus
    r_dec = params.q_dec
    r_coag = (1.0 - lam) * pc + lam * (np.sqrt(pb * q) + np.sqrt(p * qb)) ** 2
    r_branch = (1.0 - lam) * pb + lam * (np.sqrt(pc * q) - np.sqrt(p * qc)) ** 2
    r_star = np.sqrt(lam * (1.0 - lam)) * (
        np.sqrt(q) * (pb - pc) + np.sqrt(p) * (np.sqrt(pb * qb) + np.sqrt(pc * qc))
    )
    return MFCoefficients(float(r_dec), float(r_coag), float(r_branch), float(r_star))


def mf_step_density(n: float, y: float, params: GateParams) -> float:
    """Scalar density recursion; needs the center coherence y as input."""
    r = coefficients(params)
    pi = (1.0 - n) ** 2
    pib = 1.0 - pi
    return r.r_dec * pi * n + pib * (r.r_coag * n + r.r_branch * (1.0 - n) + r.r_star * y)


def _branch_kernels(params: GateParams):
    """The eight 2x2 kernels K such that rho' = sum_w w * K (per sector).

    Returned as (sector, weight-basis) -> kernel with weight basis ordered
    (1-n, <s+>, <s->, n). Sector 0: both outer neighbors empty; sector 1:
    complement. The cross terms already include their Hermitian conjugates.
    """
    lam = params.lam
    u_dec = flip_unitary("dec", params)
    u_c = flip_unitary("coag", params)
    u_b = flip_unitary("branch", params)
    u_p = flip_unitary("plus", params)
    H = lambda m: m.conj().T
    k_dec = u_dec @ NBAR @ H(u_dec)
    k_c = u_c @ NBAR @ H(u_c)
    k_b = u_b @ NBAR @ H(u_b)
    k_cp = (u_c @ u_p) @ NBAR @ H(u_c @ u_p)
    k_bp = (u_b @ H(u_p)) @ NBAR @ H(u_b @ H(u_p))
    # cross kernels: A goes with <s->, B with <s+> (before adding h.c.)
    a = u_c @ NBAR @ H(u_p) @ H(u_c)
    b = u_b @ NBAR @ u_p @ H(u_b)
    w = np.sqrt(lam * (1.0 - lam))
    zero = np.zeros((2, 2), dtype=complex)
    sector0 = (NBAR.astype(complex), zero, zero, k_dec)
    sector1 = (
        (1.0 - lam) * k_b + lam * k_cp,
        w * (H(a) - b),
        w * (a - H(b)),
        (1.0 - lam) * k_c + lam * k_bp,
    )
    return sector0, sector1


def mf_step_full(state: MFState, params: GateParams) -> MFState:
    """One application of the single-site density-matrix update."""
    state.validate()
    n = state.n
    sp = 0.5 * (state.x + 1j * state.y)
    weights = (1.0 - n, sp, np.conj(sp), n)
    sector0, sector1 = _branch_kernels(params)
    pi = (1.0 - n) ** 2
    rho = np.zeros((2, 2), dtype=complex)
    for w_, k0, k1 in zip(weights, sector0, sector1):
        rho += w_ * (pi * k0 + (1.0 - pi) * k1)
    out = MFState(
        n=float(np.real(np.trace(rho @ NUM))),
        x=float(np.real(np.trace(rho @ SX))),
        y=float(np.real(np.trace(rho @ SY))),
    )
    return out.validate()


@dataclass(frozen=True)
class StationaryResult:
    state: MFState
    last_delta: float
    iters: int


def stationary(params: GateParams, init: MFState, iters: int = 1000) -> StationaryResult:
    """Iterate the full update a fixed number of times (no early stopping).

    The last-step change is reported so callers can detect the slow relaxation
    that occurs near criticality within a fixed budget.
    """
    s = init.validate()
    delta = 0.0
    for _ in range(iters):
        nxt = mf_step_full(s, params)
        delta = max(abs(nxt.n - s.n), abs(nxt.x - s.x), abs(nxt.y - s.y))
        s = nxt
    return StationaryResult(s, delta, iters)


# ---------------------------------------------------------------------------
# vectorized grid iteration (same map, batched over a parameter grid)
# ---------------------------------------------------------------------------

_OBS = np.stack([NUM, SX, SY])  # observables extracted each step


def kernel_tables(params_list) -> np.ndarray:
    """Trace tables T[g, sector, obs, weight] for a list of parameter points.

    T contracts the per-sector kernels with (n, sx, sy); iterating with these
    tables is algebraically identical to mf_step_full, point by point.
    """
    tabs = np.empty((len(params_list), 2, 3, 4), dtype=complex)
    for g, params in enumerate(params_list):
        for s, kernels in enumerate(_branch_kernels(params)):
            for k, kern in enumerate(kernels):
                for o in range(3):
                    tabs[g, s, o, k] = np.trace(_OBS[o] @ kern)
    return tabs


def iterate_tables(tabs: np.ndarray, n0, x0=0.0, y0=0.0, iters: int = 1000):
    """Iterate the batched update; returns arrays (n, x, y) of shape [grid]."""
    m = tabs.shape[0]
    n = np.broadcast_to(np.asarray(n0, float), (m,)).copy()
    x = np.broadcast_to(np.asarray(x0, float), (m,)).copy()
    y = np.broadcast_to(np.asarray(y0, float), (m,)).copy()
    t0, t1 = tabs[:, 0], tabs[:, 1]  # [m, 3, 4]
    for _ in range(iters):
        sp = 0.5 * (x + 1j * y)
        w = np.stack([1.0 - n, sp, sp.conj(), n], axis=-1)  # [m, 4]
        pi = ((1.0 - n) ** 2)[:, None]
        out = pi * np.einsum("mok,mk->mo", t0, w) + (1.0 - pi) * np.einsum(
            "mok,mk->mo", t1, w
        )
        bad = np.abs(out.imag).max()
        if bad > 1e-9:
            raise MeanFieldError(f"non-real observable drift {bad:.3e}")
        n, x, y = out[:, 0].real, out[:, 1].real, out[:, 2].real
    return n, x, y
