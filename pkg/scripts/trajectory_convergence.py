#!/usr/bin/env python3
"""Trajectory-unraveling convergence study at L = 4, lambda = 0.5.

Compares the sampled mean density against the dense channel for increasing
sample counts; the deviation should shrink like 1/sqrt(samples).
"""

import numpy as np

from asyncqca import exact
from asyncqca.params import standard_params


def run(steps=10, seed=99):
    p = standard_params(0.6, 0.5)
    dense = exact.evolve("oxxo", p, exact.EvolutionConfig(steps=steps))
    ref = np.array([o.density for o in dense])
    print(f"{'samples':>8}  {'max |traj - dense|':>20}")
    for samples in (100, 1000, 10000, 100000):
        cfg = exact.EvolutionConfig(mode="Trajectory", steps=steps,
                                    n_samples=samples, rng_seed=seed)
        traj = exact.evolve("oxxo", p, cfg)
        dev = np.abs(np.array([o.density for o in traj]) - ref).max()
        print(f"{samples:>8}  {dev:>20.3e}")


if __name__ == "__main__":
    run()
