"""Operator factory: per-sample potentials and cached free parts."""

import numpy as np

from specshift import DIRICHLET, NEUMANN, BoundarySpec, ModelConfig, OperatorFactory
from specshift.disorder import sample_couplings
from specshift.grid import required_couplings
from specshift.spectra import dense_eigenvalues


def test_potential_is_background_plus_scaled_couplings():
    cfg = ModelConfig(d=1, L=6.0, h=1.0, coupling_strength=3.0, v0=0.25, seed=11)
    factory = OperatorFactory(cfg)
    dom = factory.domain
    table = sample_couplings(cfg.sampler(), required_couplings(dom, cfg.profile), 4)
    want = np.array(
        [0.25 + 3.0 * table[(int(np.floor(x + 0.5)),)] for x in dom.coordinates().ravel()]
    )
    assert np.allclose(factory.potential(4), want)


def test_hamiltonian_pair_shares_the_draw():
    cfg = ModelConfig(d=2, L=8.0, h=1.0, puncture=(2.0, (0.0, 0.0)), seed=5)
    factory = OperatorFactory(cfg)
    ham_n, ham_d = factory.hamiltonian_pair(7, NEUMANN, DIRICHLET)
    assert np.array_equal(ham_n.potential, ham_d.potential)
    assert ham_n.bc.inner == NEUMANN and ham_d.bc.inner == DIRICHLET
    assert np.array_equal(ham_n.potential, factory.hamiltonian(7).potential)


def test_free_operator_is_cached_per_bc():
    factory = OperatorFactory(ModelConfig(d=1, L=8.0, h=0.5))
    bc = BoundarySpec(outer=DIRICHLET)
    assert factory.free_operator(bc) is factory.free_operator(bc)
    assert factory.free_operator(bc) is not factory.free_operator(BoundarySpec(outer=NEUMANN))


def test_floor_bounds_every_sample():
    cfg = ModelConfig(d=2, L=6.0, h=1.0, coupling_strength=2.0, seed=1)
    factory = OperatorFactory(cfg)
    for s in range(5):
        ham = factory.hamiltonian(s)
        assert ham.e_floor <= dense_eigenvalues(ham).min() + 1e-12


def test_geometry_overrides_leave_config_untouched():
    cfg = ModelConfig(d=1, L=8.0, h=1.0, puncture=None)
    factory = OperatorFactory(cfg, L=16.0)
    assert factory.domain.L == 16.0
    assert cfg.L == 8.0
    assert not ModelConfig(d=1, L=8.0, h=1.0).strong_disorder
    assert ModelConfig(d=1, L=8.0, h=1.0, coupling_strength=4.0).strong_disorder
