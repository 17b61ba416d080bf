"""Exact row-to-row channel for small systems.

The joint register holds 2L qubits: the current row on qubits 0..L-1 (most
significant first) and the freshly initialized next row on qubits L..2L-1.
One time step applies the 16x16 local gate at every target position in the
configured order and then traces out (dense mode) or measures (trajectory
mode) the old row. Measuring discarded qubits commutes with the partial
trace, so trajectory averages estimate the dense channel without bias.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .gates import build_async_gate
from .params import GateParams

DENSE_LMAX = 6
TRAJ_LMAX = 12

EMPTY_CHARS = {"◦", "o", "0"}
OCC_CHARS = {"•", "x", "1"}


class CapacityError(ValueError):
    """System size beyond the configured mode cap."""


class StateError(RuntimeError):
    """A density-matrix invariant was violated (indicates a bug)."""


def parse_pattern(pattern: str) -> np.ndarray:
    bits = []
    for ch in pattern:
        if ch in EMPTY_CHARS:
            bits.append(0)
        elif ch in OCC_CHARS:
            bits.append(1)
        else:
            raise ValueError(f"unknown site character {ch!r} in pattern")
    return np.array(bits, dtype=np.int64)


@dataclass(frozen=True)
class RowDensity:
    L: int
    rho: np.ndarray

    def validate(self, tol: float = 1e-10) -> "RowDensity":
        d = 2 ** self.L
        if self.rho.shape != (d, d):
            raise StateError("density matrix shape mismatch")
        if np.abs(self.rho - self.rho.conj().T).max() > tol:
            raise StateError("density matrix not Hermitian")
        if abs(np.trace(self.rho).real - 1.0) > tol:
            raise StateError("density matrix trace != 1")
        if d <= 256 and np.linalg.eigvalsh(self.rho).min() < -1e-8:
            # full spectrum is cheap only at small L; positivity is monitored,
            # not enforced (violations indicate bugs, the map is exactly CPTP)
            raise StateError("density matrix has a significant negative eigenvalue")
        return self


@dataclass(frozen=True)
class EvolutionConfig:
    order: object = "LeftToRight"  # or "RightToLeft" or explicit site sequence
    boundary: str = "FixedEmpty"   # or "Periodic"
    steps: int = 0
    mode: str = "Dense"            # or "Trajectory"
    n_samples: int = 1
    rng_seed: int = 0

    def site_order(self, L: int) -> Sequence[int]:
        if isinstance(self.order, str):
            if self.order == "LeftToRight":
                return range(L)
            if self.order == "RightToLeft":
                return range(L - 1, -1, -1)
            raise ValueError(f"unknown ordering {self.order!r}")
        order = list(self.order)
        if sorted(order) != list(range(L)):
            raise ValueError("explicit ordering must be a permutation of the sites")
        return order


@dataclass
class RowObservables:
    n: np.ndarray           # per-site occupation
    sx: np.ndarray
    sy: np.ndarray
    density: float
    purity: Optional[float] = None
    nn: Optional[np.ndarray] = None  # two-point <n_j n_k> if requested
    n_err: Optional[np.ndarray] = None  # per-site standard error (trajectory mode)


def initial_row(pattern: str) -> RowDensity:
    bits = parse_pattern(pattern)
    L = len(bits)
    if L > DENSE_LMAX:
        raise CapacityError(f"dense row limited to L <= {DENSE_LMAX}")
    idx = int("".join(map(str, bits)), 2)
    d = 2 ** L
    rho = np.zeros((d, d), dtype=complex)
    rho[idx, idx] = 1.0
    return RowDensity(L, rho).validate()


# --------------------------------------------------------------------------
# gate plumbing
# --------------------------------------------------------------------------

def _edge_block(g16: np.ndarray, which: str) -> np.ndarray:
    """<empty|G|empty> with respect to the left or right outer control.

    The outer controls enter the gate only through diagonal projectors, so the
    block is itself unitary and fixed-empty boundaries stay exactly CPTP.
    """
    t = g16.reshape(2, 2, 2, 2, 2, 2, 2, 2)  # (l,c,r,tgt) out, then in
    if which == "left":
        return t[0, :, :, :, 0, :, :, :].reshape(8, 8)   # acts on (c, r, tgt)
    if which == "right":
        return t[:, :, 0, :, :, :, 0, :].reshape(8, 8)   # acts on (l, c, tgt)
    raise ValueError(which)


def _gate_plan(params: GateParams, L: int, cfg: EvolutionConfig):
    """List of (unitary tensor, qubit tuple) per target site k.

    Qubits are joint-register indices; the target of site k is L + k.
    """
    g16 = build_async_gate(params)
    plan = {}
    for k in range(L):
        left, right = k - 1, k + 1
        if cfg.boundary == "Periodic":
            qubits = (left % L, k, right % L, L + k)
            gate = g16
        elif cfg.boundary == "FixedEmpty":
            if left < 0 and right >= L:
                raise CapacityError("need at least 2 sites with fixed-empty edges")
            if left < 0:
                gate = _edge_block(g16, "left")
                qubits = (k, right, L + k)
            elif right >= L:
                gate = _edge_block(g16, "right")
                qubits = (left, k, L + k)
            else:
                gate = g16
                qubits = (left, k, right, L + k)
        else:
            raise ValueError(f"unknown boundary {cfg.boundary!r}")
        nq = len(qubits)
        plan[k] = (gate.reshape((2,) * (2 * nq)), qubits)
    return plan


def _apply_to_vector(psi: np.ndarray, gate_t: np.ndarray, qubits, nq_total: int):
    """Apply a small unitary to selected qubit axes of a state tensor.

    psi has shape (..., 2, 2, ..., 2) with the last nq_total axes being qubits;
    leading axes (e.g. a sample batch) are untouched.
    """
    lead = psi.ndim - nq_total
    k = len(qubits)
    axes = [lead + q for q in qubits]
    out = np.tensordot(gate_t, psi, axes=(list(range(k, 2 * k)), axes))
    # tensordot puts the k gate output axes first; move them back into place
    return np.moveaxis(out, list(range(k)), axes)


def _apply_to_density(rho_t: np.ndarray, gate_t: np.ndarray, qubits, nq: int):
    """rho -> G rho G^dag on a (2,)*2nq tensor (out axes then in axes)."""
    k = len(qubits)
    out_axes = list(qubits)
    in_axes = [nq + q for q in qubits]
    rho_t = np.tensordot(gate_t, rho_t, axes=(list(range(k, 2 * k)), out_axes))
    rho_t = np.moveaxis(rho_t, list(range(k)), out_axes)
    rho_t = np.tensordot(rho_t, gate_t.conj(), axes=(in_axes, list(range(k, 2 * k))))
    # contracted 'in' axes were removed and appended at the end; restore order
    return np.moveaxis(rho_t, list(range(2 * nq - k, 2 * nq)), in_axes)


# --------------------------------------------------------------------------
# dense channel
# --------------------------------------------------------------------------

def step_dense(rho: RowDensity, params: GateParams, cfg: EvolutionConfig) -> RowDensity:
    L = rho.L
    if L > DENSE_LMAX:
        raise CapacityError(f"dense mode limited to L <= {DENSE_LMAX}")
    d = 2 ** L
    joint = np.zeros((d, d, d, d), dtype=complex)  # (t_out, new_out, t_in, new_in)
    joint[:, 0, :, 0] = rho.rho
    t = joint.reshape((2,) * (4 * L))
    plan = _gate_plan(params, L, cfg)
    for k in cfg.site_order(L):
        gate_t, qubits = plan[k]
        t = _apply_to_density(t, gate_t, qubits, 2 * L)
    joint = t.reshape(d, d, d, d)
    new = np.einsum("anam->nm", joint)
    return RowDensity(L, new).validate()


def order_sensitivity(rho: RowDensity, params: GateParams, cfg: EvolutionConfig) -> float:
    a = step_dense(rho, params, EvolutionConfig(order="LeftToRight", boundary=cfg.boundary))
    b = step_dense(rho, params, EvolutionConfig(order="RightToLeft", boundary=cfg.boundary))
    return trace_distance(a.rho, b.rho)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())


def observables_dense(rho: RowDensity, two_point: bool = False) -> RowObservables:
    L = rho.L
    t = rho.rho.reshape((2,) * (2 * L))
    n = np.empty(L)
    sx = np.empty(L)
    sy = np.empty(L)
    for k in range(L):
        red = _reduce_to_site(t, k, L)
        n[k] = red[1, 1].real
        sx[k] = (red[0, 1] + red[1, 0]).real
        sy[k] = (1j * red[1, 0] - 1j * red[0, 1]).real
    obs = RowObservables(
        n=n, sx=sx, sy=sy, density=float(n.mean()),
        purity=float(np.trace(rho.rho @ rho.rho).real),
    )
    if two_point:
        nn = np.empty((L, L))
        diag = np.real(np.diagonal(rho.rho))
        bits = ((np.arange(2 ** L)[:, None] >> (L - 1 - np.arange(L))) & 1)
        for j in range(L):
            for k in range(L):
                nn[j, k] = float(diag @ (bits[:, j] * bits[:, k]))
        obs.nn = nn
    return obs


def _reduce_to_site(t: np.ndarray, k: int, L: int) -> np.ndarray:
    """Single-site reduced density matrix from a (2,)*2L tensor."""
    letters = "abcdefghijkl"
    out = "".join(letters[j] if j != k else "y" for j in range(L))
    inn = "".join(letters[j] if j != k else "z" for j in range(L))
    return np.einsum(f"{out}{inn}->yz", t)


# --------------------------------------------------------------------------
# trajectory unraveling
# --------------------------------------------------------------------------

def step_trajectory(psi_rows: np.ndarray, params: GateParams, cfg: EvolutionConfig,
                    rng: np.random.Generator):
    """One step for a batch of row states.

    psi_rows: array [S, 2^L] of normalized row amplitudes. Returns the new
    batch and the sampled old-row measurement outcomes [S] (basis indices).
    """
    S, d = psi_rows.shape
    L = int(np.log2(d))
    if L > TRAJ_LMAX:
        raise CapacityError(f"trajectory mode limited to L <= {TRAJ_LMAX}")
    joint = np.zeros((S, d, d), dtype=complex)
    joint[:, :, 0] = psi_rows
    t = joint.reshape((S,) + (2,) * (2 * L))
    plan = _gate_plan(params, L, cfg)
    for k in cfg.site_order(L):
        gate_t, qubits = plan[k]
        t = _apply_to_vector(t, gate_t, qubits, 2 * L)
    joint = t.reshape(S, d, d)
    probs = np.einsum("sbn,sbn->sb", joint, joint.conj()).real
    probs = np.maximum(probs, 0.0)
    probs /= probs.sum(axis=1, keepdims=True)
    u = rng.random(S)
    outcomes = (np.cumsum(probs, axis=1) < u[:, None]).sum(axis=1)
    outcomes = np.minimum(outcomes, d - 1)
    new = joint[np.arange(S), outcomes, :]
    norms = np.linalg.norm(new, axis=1)
    if np.any(norms < 1e-150):
        raise StateError("zero-norm measurement branch; resample")
    return new / norms[:, None], outcomes


def observables_trajectory(psi_rows: np.ndarray) -> RowObservables:
    S, d = psi_rows.shape
    L = int(np.log2(d))
    t = psi_rows.reshape((S,) + (2,) * L)
    n = np.empty(L)
    sx = np.empty(L)
    sy = np.empty(L)
    nerr = np.empty(L)
    for k in range(L):
        a = np.moveaxis(t, 1 + k, -1).reshape(S, d // 2, 2)
        p1 = np.einsum("smi,smi->s", a[..., 1:], a[..., 1:].conj()).real
        cross = np.einsum("sm,sm->s", a[..., 0].conj().reshape(S, -1),
                          a[..., 1].reshape(S, -1))
        n[k] = p1.mean()
        nerr[k] = p1.std(ddof=1) / np.sqrt(S) if S > 1 else 0.0
        sx[k] = (2.0 * cross.real).mean()
        sy[k] = (-2.0 * cross.imag).mean()
    return RowObservables(n=n, sx=sx, sy=sy, density=float(n.mean()), n_err=nerr)


# --------------------------------------------------------------------------
# time evolution driver
# --------------------------------------------------------------------------

def evolve(initial: "RowDensity | str", params: GateParams, cfg: EvolutionConfig):
    """Run cfg.steps steps; returns a list of RowObservables (length steps+1)."""
    if cfg.mode == "Dense":
        rho = initial if isinstance(initial, RowDensity) else initial_row(initial)
        series = [observables_dense(rho)]
        for _ in range(cfg.steps):
            rho = step_dense(rho, params, cfg)
            series.append(observables_dense(rho))
        return series
    if cfg.mode == "Trajectory":
        pattern = initial if isinstance(initial, str) else None
        if pattern is None:
            raise ValueError("trajectory mode starts from a basis pattern")
        bits = parse_pattern(pattern)
        L = len(bits)
        if L > TRAJ_LMAX:
            raise CapacityError(f"trajectory mode limited to L <= {TRAJ_LMAX}")
        d = 2 ** L
        idx = int("".join(map(str, bits)), 2)
        psi = np.zeros((cfg.n_samples, d), dtype=complex)
        psi[:, idx] = 1.0
        rng = np.random.Generator(np.random.Philox(cfg.rng_seed))
        series = [observables_trajectory(psi)]
        for _ in range(cfg.steps):
            psi, _ = step_trajectory(psi, params, cfg, rng)
            series.append(observables_trajectory(psi))
        return series
    raise ValueError(f"unknown mode {cfg.mode!r}")
