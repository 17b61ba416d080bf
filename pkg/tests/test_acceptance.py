"""Acceptance gate: one test per criterion, at the stated tolerances.

These are end-to-end checks of the shipped behavior, not unit tests; each
prints nothing extra and passes or fails on the stated numbers alone.
"""

import numpy as np
import pytest

from asyncqca import analysis, classical, exact, meanfield, qcp
from asyncqca.gates import build_async_gate, build_sync_gate, unitarity_defect
from asyncqca.meanfield import MFState, coefficients, mf_step_density, mf_step_full
from asyncqca.params import GateParams, standard_params

from conftest import random_bloch, random_params

SEED = 715517


def test_criterion_01_gate_unitarity():
    rng = np.random.default_rng(SEED)
    for _ in range(100):
        p = random_params(rng)
        assert unitarity_defect(build_async_gate(p)) < 1e-12
        assert unitarity_defect(build_sync_gate(p.with_lam(0.0))) < 1e-12


def test_criterion_02_synchronism_at_lambda_zero():
    rng = np.random.default_rng(SEED)
    cfg = exact.EvolutionConfig(boundary="Periodic")
    for _ in range(20):
        p = random_params(rng, lam=0.0)
        row = exact.initial_row("".join("ox"[b] for b in rng.integers(0, 2, 4)))
        assert exact.order_sensitivity(row, p, cfg) < 1e-12
    seeded = exact.initial_row("oxxo")
    for lam in (0.3, 0.6, 0.9):
        assert exact.order_sensitivity(seeded, standard_params(0.6, lam), cfg) > 1e-6


def test_criterion_03_coefficient_identity():
    rng = np.random.default_rng(SEED)
    ket_e = np.array([1.0, 0.0])
    ket_o = np.array([0.0, 1.0])
    y_minus = np.array([1.0, 1j]) / np.sqrt(2)   # <sy> = -1
    y_plus = np.array([1.0, -1j]) / np.sqrt(2)   # <sy> = +1
    n_t = np.kron(np.eye(8), np.diag([0.0, 1.0]))

    def occ(g, left, center, right):
        psi = g @ np.kron(np.kron(np.kron(left, center), right), ket_e)
        return float(np.real(psi.conj() @ n_t @ psi))

    for _ in range(100):
        p = random_params(rng)
        g = build_async_gate(p)
        c = coefficients(p)
        assert abs(occ(g, ket_e, ket_o, ket_e) - c.r_dec) < 1e-12
        assert abs(occ(g, ket_o, ket_o, ket_e) - c.r_coag) < 1e-12
        assert abs(occ(g, ket_o, ket_e, ket_e) - c.r_branch) < 1e-12
        star = 0.5 * (occ(g, ket_o, y_plus, ket_e) - occ(g, ket_o, y_minus, ket_e))
        assert abs(star - c.r_star) < 1e-12
        n, x, y = random_bloch(rng)
        assert abs(mf_step_full(MFState(n, x, y), p).n
                   - mf_step_density(n, y, p)) < 1e-12


def test_criterion_04_classical_limit_oracle():
    rng = np.random.default_rng(SEED)
    cfg = exact.EvolutionConfig(boundary="Periodic")
    for _ in range(5):
        p = random_params(rng, lam=0.0)
        M = classical.transition_matrix(4, p, "Periodic")
        w = rng.random(16)
        w /= w.sum()
        # restriction to diagonal states equals the local-rule Markov matrix
        out = exact.step_dense(exact.RowDensity(4, np.diag(w).astype(complex)),
                               p, cfg)
        assert np.abs(np.diag(out.rho).real - M @ w).max() < 1e-10
        # the diagonal sector is closed: populations of the output do not
        # depend on input coherences, so the restriction is well-defined
        coh = np.outer(np.sqrt(w), np.sqrt(w)).astype(complex)
        rho_mixed = 0.5 * np.diag(w) + 0.5 * coh  # same diagonal, full coherences
        out2 = exact.step_dense(exact.RowDensity(4, rho_mixed), p, cfg)
        assert np.abs(np.diag(out2.rho).real - M @ w).max() < 1e-10


def test_criterion_05_phase_diagram_reproduction():
    base = standard_params(0.0, 0.0)
    lam = np.linspace(0.0, 1.0, 201)
    pb = np.linspace(0.0, 1.0, 201)
    pd = analysis.sweep(base, lam, pb, iters=1000, threads=4)
    # an absorbing/active boundary exists on the grid
    assert pd.n_inf.min() < 1e-6 and pd.n_inf.max() > 0.5
    for lam_c in (0.5, 0.7, 0.9):
        rep = analysis.classify_transition(lam_c, base)
        assert rep.order == "Continuous", (
            f"lambda={lam_c}: {rep.order} (jump={rep.jump:.3f}, "
            f"hysteresis={rep.hysteresis:.3f})"
        )
    for lam_c in (0.94, 0.97):
        assert analysis.classify_transition(lam_c, base).order == "FirstOrder"
    lam_star = analysis.find_lambda_star(base)
    assert lam_star == pytest.approx(0.92, abs=0.02)


def test_criterion_06_g_star_reproduction():
    base = standard_params(0.0, 0.0)
    table = analysis.g_along_critical(base, np.linspace(0.5, 1.0, 11), iters=1000)
    gs = [g for _, _, g in table if g is not None]
    assert len(gs) >= 2 and gs[-1] > 2.0 * gs[0], f"g_c values: {gs}"
    lam_star = analysis.find_lambda_star(base)
    rep = analysis.classify_transition(lam_star, base)
    assert rep.p_c is not None
    g_star = qcp.g_ratio(base.with_branch(rep.p_c).with_lam(lam_star))
    assert 3.75 <= g_star <= 4.35, f"g* = {g_star:.3f} at lambda* = {lam_star:.4f}"


def test_criterion_07_qcp_roundtrip():
    rng = np.random.default_rng(SEED)
    for _ in range(50):
        p = random_params(rng)
        want = coefficients(p)
        gs = []
        for dt in (1e-3, 1e-2, 1e-1):
            got, _ = qcp.qcp_coefficients(qcp.map_qca_to_qcp(p, dt=dt))
            for a, b in zip((got.r_dec, got.r_coag, got.r_branch, got.r_star),
                            (want.r_dec, want.r_coag, want.r_branch, want.r_star)):
                assert abs(a - b) < 1e-14
            gs.append(qcp.map_qca_to_qcp(p, dt=dt).g)
        if gs[0] is not None:
            assert max(gs) - min(gs) <= 1e-12 * max(1.0, abs(gs[0]))


def test_criterion_08_continuous_time_limit():
    rates = classical.CPRates(kappa_c=0.25, kappa_b=0.9, gamma=0.35, dt=1.0,
                              negative_kc=False)
    ref = classical.cp_mf_ode(rates, n0=0.8, t_max=4.0)
    n_ref = ref.n[-1]

    def discrete_endpoint(dt):
        r, _ = qcp.qcp_coefficients(qcp.QCPRates(
            gamma=rates.gamma, kappa_c=rates.kappa_c, kappa_b=rates.kappa_b,
            omega=0.0, dt=dt))
        n = 0.8
        for _ in range(round(4.0 / dt)):
            pi = (1.0 - n) ** 2
            n = r.r_dec * pi * n + (1.0 - pi) * (r.r_coag * n
                                                 + r.r_branch * (1.0 - n))
        return n

    e1 = abs(discrete_endpoint(0.02) - n_ref)
    e2 = abs(discrete_endpoint(0.01) - n_ref)
    assert 1.6 < e1 / e2 < 2.4  # first-order consistency
    # gamma = 0 stationary density
    r0 = classical.CPRates(kappa_c=0.3, kappa_b=0.7, gamma=0.0, dt=1.0,
                           negative_kc=False)
    res = classical.cp_mf_ode(r0, n0=0.5, t_max=400.0)
    assert abs(res.n[-1] - 0.7 / (0.7 + 0.3)) < 1e-8


def test_criterion_09_mean_field_onset_exponent():
    base = standard_params(0.0, 0.0)
    for lam in (0.0, 0.5):
        slope = analysis.fit_mf_beta(lam, base)
        assert slope == pytest.approx(1.0, abs=0.05), f"lambda={lam}: {slope:.4f}"


def test_criterion_10_trajectory_dense_equivalence():
    p = standard_params(0.6, 0.5)
    L, S = 4, 100_000
    cfg = exact.EvolutionConfig(mode="Trajectory", steps=10, n_samples=S,
                                rng_seed=SEED)
    dense = exact.evolve("oxxo", p, exact.EvolutionConfig(steps=10))
    psi = np.zeros((S, 2 ** L), dtype=complex)
    psi[:, int("0110", 2)] = 1.0
    rng = np.random.Generator(np.random.Philox(SEED))
    weights = np.array([bin(i).count("1") / L for i in range(2 ** L)])
    for t in range(1, 11):
        psi, _ = exact.step_trajectory(psi, p, cfg, rng)
        per_sample = (np.abs(psi) ** 2) @ weights
        mean, err = per_sample.mean(), per_sample.std(ddof=1) / np.sqrt(S)
        diff = abs(dense[t].density - mean)
        assert diff < 4 * err, f"t={t}: diff={diff:.2e}, stderr={err:.2e}"
