"""Shared helpers for the test suite."""

import numpy as np

from specshift import ModelConfig, OperatorFactory

SWITCH_EPS = 0.5
SWITCH_DELTA = 0.1


def switch_instance(seed, amplitude=0.02, dim=None):
    """One disordered chain plus a small nonnegative perturbation and a
    switch placement whose lower edge is crossed by exactly one eigenvalue
    branch along the coupling path.

    The perturbation amplitude controls the branch velocities: sweeps of the
    eigenvalue intervals [lambda_i(delta), lambda_i(1-delta)] stay narrow, so
    a mid-sweep energy gives one guaranteed crossing of the switch edge while
    the upper edge stays clear of every branch.
    """
    rng = np.random.default_rng(seed)
    drawn = int(rng.integers(20, 51))
    if dim is None:
        dim = drawn
    cfg = ModelConfig(d=1, L=float(dim + 1), h=1.0, seed=seed)
    ham = OperatorFactory(cfg).hamiltonian(0)
    assert ham.dim == dim
    u_vec = amplitude * (0.5 + rng.random(dim))
    dense = ham.matrix.toarray()
    lo = np.linalg.eigvalsh(dense + SWITCH_DELTA * np.diag(u_vec))
    hi = np.linalg.eigvalsh(dense + (1.0 - SWITCH_DELTA) * np.diag(u_vec))
    for j in range(dim // 3, dim - 1):
        energy = 0.5 * (lo[j] + hi[j])
        top = energy + SWITCH_EPS
        clear = min(min(abs(top - a), abs(top - b)) for a, b in zip(lo, hi))
        inside = any(a <= top <= b for a, b in zip(lo, hi))
        if not inside and clear > 0.01:
            return ham, u_vec, energy
    raise AssertionError(f"no admissible switch placement for seed {seed}")
