import numpy as np
import pytest

from asyncqca.params import GateParams


@pytest.fixture
def rng():
    return np.random.default_rng(20260826)


def random_params(rng, lam=None) -> GateParams:
    vals = rng.random(4)
    return GateParams(
        p_dec=float(vals[0]), p_coag=float(vals[1]), p_branch=float(vals[2]),
        p_plus=float(vals[3]), lam=float(rng.random()) if lam is None else lam,
    )


def random_bloch(rng):
    """Uniform point in the Bloch ball as (n, x, y)."""
    v = rng.normal(size=3)
    v *= rng.random() ** (1 / 3) / np.linalg.norm(v)
    return (1.0 + v[2]) / 2.0, v[0], v[1]
