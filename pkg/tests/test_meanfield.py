"""Single-site map: closed-form coefficients vs the gate, and the full update."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asyncqca.gates import build_async_gate, NUM
from asyncqca.meanfield import (
    MFState,
    MeanFieldError,
    coefficients,
    iterate_tables,
    kernel_tables,
    mf_step_density,
    mf_step_full,
    stationary,
)
from asyncqca.params import standard_params

from conftest import random_bloch, random_params

KET_E = np.array([1.0, 0.0])
KET_O = np.array([0.0, 1.0])


def _gate_occupation(params, left, center, right):
    """Target occupation after one gate on |l c r> controls, empty target."""
    g = build_async_gate(params)
    psi = np.kron(np.kron(np.kron(left, center), right), KET_E)
    out = g @ psi
    n_t = np.kron(np.eye(8), NUM)
    return float(np.real(out.conj() @ n_t @ out))


def test_coefficients_match_gate(rng):
    """The four closed-form rates, read off the 16x16 gate itself."""
    y_plus = np.array([1.0, 1j]) / np.sqrt(2)   # <sy> = -1 in this basis order
    y_minus = np.array([1.0, -1j]) / np.sqrt(2)
    for _ in range(100):
        p = random_params(rng)
        c = coefficients(p)
        assert _gate_occupation(p, KET_E, KET_O, KET_E) == pytest.approx(c.r_dec, abs=1e-12)
        assert _gate_occupation(p, KET_O, KET_O, KET_E) == pytest.approx(c.r_coag, abs=1e-12)
        assert _gate_occupation(p, KET_O, KET_E, KET_E) == pytest.approx(c.r_branch, abs=1e-12)
        n_p = _gate_occupation(p, KET_O, y_plus, KET_E)
        n_m = _gate_occupation(p, KET_O, y_minus, KET_E)
        # center <sy> = -/+ 1: the coherence response isolates r_star
        assert 0.5 * (n_m - n_p) == pytest.approx(c.r_star, abs=1e-12)


def test_full_step_matches_density_recursion(rng):
    for _ in range(100):
        p = random_params(rng)
        n, x, y = random_bloch(rng)
        out = mf_step_full(MFState(n, x, y), p)
        assert out.n == pytest.approx(mf_step_density(n, y, p), abs=1e-12)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1),
       st.floats(0, 1), st.data())
@settings(max_examples=60, deadline=None)
def test_full_step_preserves_validity(p_dec, p_coag, p_branch, p_plus, lam, data):
    from asyncqca.params import GateParams
    u = data.draw(st.floats(0, 1)), data.draw(st.floats(0, 2 * np.pi)), data.draw(st.floats(-1, 1))
    r, phi, cz = u
    s = np.sqrt(max(0.0, 1 - cz ** 2)) * r
    state = MFState((1 + r * cz) / 2, s * np.cos(phi), s * np.sin(phi))
    out = mf_step_full(state, GateParams(p_dec, p_coag, p_branch, p_plus, lam))
    out.validate()  # raises MeanFieldError on positivity loss
    assert 0.0 <= out.n <= 1.0


def test_empty_state_is_absorbing(rng):
    for _ in range(20):
        p = random_params(rng)
        out = mf_step_full(MFState(0.0, 0.0, 0.0), p)
        assert abs(out.n) < 1e-14 and abs(out.x) < 1e-14 and abs(out.y) < 1e-14


def test_fixture_values():
    p = standard_params(0.6, 0.5)
    c = coefficients(p)
    assert c.r_dec == pytest.approx(0.1, abs=1e-14)
    assert c.r_branch == pytest.approx(0.3, abs=1e-14)
    assert c.r_coag == pytest.approx(0.4869693845669907, abs=1e-13)
    assert c.r_star == pytest.approx(0.36206465633930246, abs=1e-13)
    assert mf_step_density(0.5, 0.2, p) == pytest.approx(0.3619232176635169, abs=1e-13)
    out = mf_step_full(MFState(0.5, 0.1, 0.2), p)
    assert out.y == pytest.approx(0.536934316565947, abs=1e-13)


def test_tables_reproduce_scalar_iteration(rng):
    plist = [random_params(rng) for _ in range(5)]
    tabs = kernel_tables(plist)
    n, x, y = iterate_tables(tabs, 0.7, 0.1, -0.2, iters=40)
    for i, p in enumerate(plist):
        s = MFState(0.7, 0.1, -0.2)
        for _ in range(40):
            s = mf_step_full(s, p)
        assert n[i] == pytest.approx(s.n, abs=1e-12)
        assert x[i] == pytest.approx(s.x, abs=1e-12)
        assert y[i] == pytest.approx(s.y, abs=1e-12)


def test_stationary_reports_residual():
    res = stationary(standard_params(0.8, 0.0), MFState(1.0), iters=500)
    assert res.iters == 500
    assert res.last_delta < 1e-10
    # lam = 0 scalar fixed point: q_dec pi n + (1-pi)(p_coag n + p_branch (1-n))
    n = res.state.n
    pi = (1 - n) ** 2
    rhs = 0.1 * pi * n + (1 - pi) * (0.1 * n + 0.8 * (1 - n))
    assert n == pytest.approx(rhs, abs=1e-12)


def test_invalid_state_rejected():
    with pytest.raises(MeanFieldError):
        MFState(0.5, 1.0, 1.0).validate()
    with pytest.raises(MeanFieldError):
        MFState(1.2, 0.0, 0.0).validate()
