import numpy as np
import pytest

from asyncqca.exact import (
    CapacityError,
    EvolutionConfig,
    RowDensity,
    StateError,
    evolve,
    initial_row,
    observables_dense,
    order_sensitivity,
    parse_pattern,
    step_dense,
    step_trajectory,
    trace_distance,
)
from asyncqca.params import standard_params

from conftest import random_params

PCFG = EvolutionConfig(boundary="Periodic")


def test_pattern_parsing_and_aliases():
    assert list(parse_pattern("oxox")) == [0, 1, 0, 1]
    assert list(parse_pattern("◦••◦")) == [0, 1, 1, 0]
    assert list(parse_pattern("0110")) == [0, 1, 1, 0]
    with pytest.raises(ValueError):
        parse_pattern("ab")


def test_initial_row_is_valid_projector():
    rho = initial_row("oxxo")
    rho.validate()
    assert np.trace(rho.rho @ rho.rho).real == pytest.approx(1.0, abs=1e-14)
    assert observables_dense(rho).n == pytest.approx([0, 1, 1, 0])


def test_step_preserves_density_matrix(rng):
    rho = initial_row("xoxx")
    for _ in range(4):
        rho = step_dense(rho, random_params(rng), PCFG)
        rho.validate()


def test_all_empty_is_absorbing(rng):
    rho = initial_row("oooo")
    for _ in range(3):
        rho = step_dense(rho, random_params(rng), PCFG)
    assert abs(rho.rho[0, 0].real - 1.0) < 1e-12
    assert np.abs(rho.rho).sum() == pytest.approx(1.0, abs=1e-12)


def test_order_sensitivity_zero_when_synchronous(rng):
    for _ in range(20):
        p = random_params(rng, lam=0.0)
        rho = initial_row("".join("ox"[b] for b in rng.integers(0, 2, 4)))
        assert order_sensitivity(rho, p, PCFG) < 1e-12


def test_order_sensitivity_fixtures():
    rho = initial_row("oxxo")
    vals = {
        0.3: 0.19540657998588837,
        0.6: 0.33046492861351634,
        0.9: 0.742377554052785,
    }
    for lam, expected in vals.items():
        got = order_sensitivity(rho, standard_params(0.6, lam), PCFG)
        assert got == pytest.approx(expected, abs=1e-10)
        assert got > 0


def test_explicit_order_matches_named_order():
    p = standard_params(0.6, 0.4)
    rho = initial_row("xxoo")
    a = step_dense(rho, p, EvolutionConfig(order="LeftToRight", boundary="Periodic"))
    b = step_dense(rho, p, EvolutionConfig(order=[0, 1, 2, 3], boundary="Periodic"))
    assert trace_distance(a.rho, b.rho) < 1e-13


def test_dense_capacity_guard():
    with pytest.raises(CapacityError):
        initial_row("x" * 7)
    with pytest.raises(CapacityError):
        evolve("x" * 13, standard_params(0.5, 0.2),
               EvolutionConfig(mode="Trajectory", steps=1))


def test_boundary_modes_differ():
    p = standard_params(0.6, 0.5)
    rho = initial_row("xooo")
    a = step_dense(rho, p, EvolutionConfig(boundary="FixedEmpty"))
    b = step_dense(rho, p, EvolutionConfig(boundary="Periodic"))
    assert trace_distance(a.rho, b.rho) > 1e-3


def test_dense_fixture_lam_half():
    cfg = EvolutionConfig(boundary="FixedEmpty", steps=5)
    series = evolve("oxxo", standard_params(0.6, 0.5), cfg)
    assert len(series) == 6
    assert series[5].density == pytest.approx(0.09856818025908759, abs=1e-10)
    assert series[5].purity == pytest.approx(0.5358041452366263, abs=1e-10)
    assert series[5].n[2] == pytest.approx(0.12749298674600054, abs=1e-10)


def test_trajectory_seed_determinism():
    cfg = EvolutionConfig(mode="Trajectory", steps=4, n_samples=200, rng_seed=11,
                          boundary="Periodic")
    a = evolve("oxxo", standard_params(0.6, 0.5), cfg)
    b = evolve("oxxo", standard_params(0.6, 0.5), cfg)
    for oa, ob in zip(a, b):
        assert np.array_equal(oa.n, ob.n)


def test_trajectory_matches_dense_all_classical():
    # lam = 0 diagonal observables are exactly classical, so modest sampling
    # should agree with the dense channel well inside its standard error
    p = standard_params(0.7, 0.0)
    dense = evolve("xxxx", p, EvolutionConfig(steps=6, boundary="Periodic"))
    traj = evolve("xxxx", p, EvolutionConfig(mode="Trajectory", steps=6,
                                             n_samples=20000, rng_seed=5,
                                             boundary="Periodic"))
    for od, ot in zip(dense[1:], traj[1:]):
        err = float(np.mean(ot.n_err)) + 1e-12
        assert abs(od.density - ot.density) < 5 * err


def test_invalid_density_rejected():
    bad = np.eye(4) / 3.9
    with pytest.raises(StateError):
        RowDensity(2, bad.astype(complex)).validate()
