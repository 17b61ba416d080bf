"""Single-site flip unitaries and the composite 16x16 local gates.

Basis convention: index 0 = empty, index 1 = occupied. Qubit ordering inside
the composite gate is spatial, (left control, center control, right control,
target); all bit-indexed kernels in the package rely on this ordering.
"""

from __future__ import annotations

import numpy as np

from .params import GateParams, ParameterError

# Pauli / projector building blocks (empty = 0, occupied = 1).
ID2 = np.eye(2, dtype=complex)
SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
NUM = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)        # |occ><occ|
NBAR = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)       # |emp><emp|
SPLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)      # |occ><emp|
SMINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)     # |emp><occ|
SY = -1j * SPLUS + 1j * SMINUS


def flip_unitary(kind: str, params: GateParams) -> np.ndarray:
    """One of the four 2x2 unitaries: 'dec', 'coag', 'branch', 'plus'.

    'dec' keeps the target with amplitude sqrt(p_dec) and flips with
    amplitude -i sqrt(q_dec); the conditioned unitaries flip with amplitude
    -i sqrt(p) and keep with sqrt(q); the mixing unitary is i sqrt(q) - sqrt(p) sx.
    """
    if kind == "dec":
        return np.sqrt(params.p_dec) * ID2 - 1j * np.sqrt(params.q_dec) * SX
    if kind == "coag":
        return np.sqrt(params.q_coag) * ID2 - 1j * np.sqrt(params.p_coag) * SX
    if kind == "branch":
        return np.sqrt(params.q_branch) * ID2 - 1j * np.sqrt(params.p_branch) * SX
    if kind == "plus":
        return 1j * np.sqrt(params.q_plus) * ID2 - np.sqrt(params.p_plus) * SX
    raise ParameterError(f"unknown flip unitary kind {kind!r}")


def _kron4(a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray) -> np.ndarray:
    return np.kron(np.kron(np.kron(a, b), c), d)


def build_sync_gate(params: GateParams) -> np.ndarray:
    """Commuting-gate limit: controls are only read, never written."""
    u_dec = flip_unitary("dec", params)
    u_c = flip_unitary("coag", params)
    u_b = flip_unitary("branch", params)
    g = _kron4(NBAR, NUM, NBAR, u_dec)
    g += _kron4(NBAR, NBAR, NBAR, ID2)
    # complement of "both outer controls empty", split over the center state
    for left, right in ((NBAR, NUM), (NUM, NBAR), (NUM, NUM)):
        g += _kron4(left, NUM, right, u_c)
        g += _kron4(left, NBAR, right, u_b)
    return g


def build_async_gate(params: GateParams) -> np.ndarray:
    """Asynchronous gate: adds center-control raising/lowering branches.

    The isolated sector (both outer controls empty) is identical to the
    synchronous gate for every lam; the remaining sector interpolates between
    the conditioned flips (weight sqrt(1-lam)) and the coherence-generating
    branch (weight sqrt(lam)).
    """
    lam = params.lam
    u_dec = flip_unitary("dec", params)
    u_c = flip_unitary("coag", params)
    u_b = flip_unitary("branch", params)
    u_p = flip_unitary("plus", params)
    g = _kron4(NBAR, NUM, NBAR, u_dec)
    g += _kron4(NBAR, NBAR, NBAR, ID2)
    a, b = np.sqrt(1.0 - lam), np.sqrt(lam)
    for left, right in ((NBAR, NUM), (NUM, NBAR), (NUM, NUM)):
        g += a * (_kron4(left, NUM, right, u_c) + _kron4(left, NBAR, right, u_b))
        g += b * (_kron4(left, SPLUS, right, u_c @ u_p)
                  - _kron4(left, SMINUS, right, u_b @ u_p.conj().T))
    return g


def unitarity_defect(g: np.ndarray) -> float:
    """max-abs entrywise residual of G^dag G - 1."""
    d = g.conj().T @ g - np.eye(g.shape[0])
    return float(np.abs(d).max())


def commutator_norm(params: GateParams, which: str = "fro") -> float:
    """Norm of [G_k, G_{k+1}] on the joint 6-qubit space.

    Adjacent gates share two controls: with controls c0..c3 and targets t1, t2,
    gate one acts on (c0, c1, c2, t1) and gate two on (c1, c2, c3, t2). Qubit
    order of the embedding: (c0, c1, c2, c3, t1, t2).
    """
    g = build_async_gate(params)
    eye = np.eye(2, dtype=complex)

    def lift(gate16: np.ndarray, qubits: tuple) -> np.ndarray:
        n = 6
        g8 = gate16.reshape((2,) * 8)
        # tensor with identities on the remaining qubits
        rest = [q for q in range(n) if q not in qubits]
        m = g8
        for _ in rest:
            m = np.tensordot(m, eye, axes=0)
        # axis layout now: gate outs (4), gate ins (4), then (out, in) pairs
        # for each identity qubit
        out_axes = [None] * n
        in_axes = [None] * n
        for pos, q in enumerate(qubits):
            out_axes[q] = pos
            in_axes[q] = 4 + pos
        for j, q in enumerate(rest):
            out_axes[q] = 8 + 2 * j
            in_axes[q] = 8 + 2 * j + 1
        m = m.transpose(out_axes + in_axes)
        return m.reshape(2 ** n, 2 ** n)

    g_left = lift(g, (0, 1, 2, 4))
    g_right = lift(g, (1, 2, 3, 5))
    comm = g_left @ g_right - g_right @ g_left
    if which == "fro":
        return float(np.linalg.norm(comm, "fro"))
    if which == "spectral":
        return float(np.linalg.norm(comm, 2))
    raise ParameterError(f"unknown norm {which!r}")
