"""Resolvent block norms, decay fits, and the localization probes."""

import numpy as np
import pytest
import scipy.sparse as sp

from specshift import (
    DegenerateFit,
    EnergyInSpectrum,
    ModelConfig,
    RangeError,
    SingularShift,
)
from specshift.grid import DIRICHLET, BoundarySpec, Hamiltonian, assemble_laplacian, make_domain
from specshift.localization import (
    combes_thomas_profile,
    decay_fit,
    fractional_moment_probe,
    lattice_decay_rate,
    resolvent_block_norm,
)


def identity_hamiltonian(h=1.0):
    dom = make_domain(1, 4.0 * h, h)
    eye = sp.csr_matrix(sp.identity(dom.site_count))
    return Hamiltonian(
        matrix=eye,
        domain=dom,
        bc=BoundarySpec(outer=DIRICHLET),
        potential=np.zeros(dom.site_count),
        e_floor=1.0,
    )


def test_identity_resolvent_single_site_block():
    ham = identity_hamiltonian(h=1.0)
    assert resolvent_block_norm(ham, 0.5, (0.0,), (0.0,)) == pytest.approx(2.0)
    # h-scaling of the continuum convention
    ham_fine = identity_hamiltonian(h=0.5)
    assert resolvent_block_norm(ham_fine, 0.5, (0.0,), (0.0,)) == pytest.approx(
        2.0 * 0.5, rel=1e-12
    )


def test_empty_block_gives_zero():
    ham = identity_hamiltonian()
    assert resolvent_block_norm(ham, 0.5, (50.0,), (0.0,)) == 0.0


def test_real_energy_inside_spectrum_rejected():
    ham = assemble_laplacian(make_domain(1, 16.0, 1.0), BoundarySpec(outer=DIRICHLET))
    with pytest.raises(SingularShift):
        resolvent_block_norm(ham, 2.0, (0.0,), (0.0,))


def test_free_resolvent_decays_along_the_chain():
    ham = assemble_laplacian(make_domain(1, 32.0, 1.0), BoundarySpec(outer=DIRICHLET))
    n4 = resolvent_block_norm(ham, -1.0, (0.0,), (4.0,))
    n8 = resolvent_block_norm(ham, -1.0, (0.0,), (8.0,))
    assert 0.0 < n8 < n4


def test_adjoint_symmetry_of_block_norms():
    ham = assemble_laplacian(make_domain(2, 10.0, 1.0), BoundarySpec(outer=DIRICHLET))
    z = 1.3 + 0.05j
    a = resolvent_block_norm(ham, z, (1.0, 0.0), (-2.0, 1.0))
    b = resolvent_block_norm(ham, np.conj(z), (-2.0, 1.0), (1.0, 0.0))
    assert a == pytest.approx(b, abs=1e-10)


def test_decay_fit_exact_and_degenerate_inputs():
    fit = decay_fit([(1.0, np.exp(-2.0)), (2.0, np.exp(-4.0)), (3.0, np.exp(-6.0))])
    assert fit.rate == pytest.approx(2.0)
    assert fit.r_squared == pytest.approx(1.0)
    flat = decay_fit([(1.0, 0.7), (2.0, 0.7), (3.0, 0.7)])
    assert flat.rate == pytest.approx(0.0)
    with pytest.raises(DegenerateFit):
        decay_fit([(1.0, 1.0), (2.0, 0.5)])
    with pytest.raises(DegenerateFit):
        decay_fit([(1.0, 1.0), (2.0, 0.0), (3.0, 0.1)])


def test_decay_fit_recovers_noisy_rate():
    rng = np.random.default_rng(31)
    errs = []
    for _ in range(100):
        d = np.arange(1.0, 7.0)
        vals = 3.0 * np.exp(-0.8 * d) * (1.0 + 0.1 * rng.standard_normal(d.size))
        errs.append(abs(decay_fit(list(zip(d, vals))).rate - 0.8) / 0.8)
    assert np.median(errs) < 0.15


def test_combes_thomas_rate_deepens_below_the_floor():
    for d, L in ((1, 48.0), (2, 24.0)):
        ham = assemble_laplacian(make_domain(d, L, 1.0), BoundarySpec(outer=DIRICHLET))
        x0 = (0.0,) * d
        shallow = combes_thomas_profile(ham, ham.e_floor - 1.0, x0, (2.0, 4.0, 6.0, 8.0))
        deep = combes_thomas_profile(ham, ham.e_floor - 4.0, x0, (2.0, 4.0, 6.0, 8.0))
        assert shallow.r_squared >= 0.95 and deep.r_squared >= 0.95
        assert deep.rate > shallow.rate > 0.0


def test_combes_thomas_matches_lattice_green_function_rate():
    for h in (1.0, 0.5):
        ham = assemble_laplacian(make_domain(1, 48.0, h), BoundarySpec(outer=DIRICHLET))
        fit = combes_thomas_profile(ham, -1.0, (0.0,), (2.0, 4.0, 8.0, 12.0))
        assert fit.rate == pytest.approx(lattice_decay_rate(1.0, h), rel=0.10)


def test_combes_thomas_rejects_spectrum_energies_and_short_fits():
    ham = assemble_laplacian(make_domain(1, 16.0, 1.0), BoundarySpec(outer=DIRICHLET))
    with pytest.raises(EnergyInSpectrum):
        combes_thomas_profile(ham, 1.0, (0.0,), (2.0, 4.0, 6.0))
    with pytest.raises(DegenerateFit):
        combes_thomas_profile(ham, -1.0, (0.0,), (2.0, 4.0))


def test_probe_validates_inputs():
    cfg = ModelConfig(d=1, L=16.0, h=1.0)
    with pytest.raises(RangeError):
        fractional_moment_probe(cfg, 0.5, 0.01, 1.5, (0.0,), (2.0, 4.0, 6.0), n=2)
    with pytest.raises(SingularShift):
        fractional_moment_probe(cfg, 0.5, 0.0, 0.5, (0.0,), (2.0, 4.0, 6.0), n=2)


def test_probe_zero_distance_obeys_trivial_bound():
    cfg = ModelConfig(d=1, L=16.0, h=1.0)
    probe = fractional_moment_probe(cfg, 0.5, 0.05, 0.5, (0.0,), (0.0, 2.0, 4.0), n=8)
    assert probe.estimates[0].mean <= (1.0 / 0.05) ** 0.5 * (1 + 1e-8)
    assert all(m <= (1 + 1e-8) / 0.05 for m in probe.raw_means)
    assert probe.heuristic


def test_disorder_strengthens_decay_over_free_motion():
    distances = (4.0, 8.0, 12.0, 16.0)
    free = fractional_moment_probe(
        ModelConfig(d=1, L=48.0, h=1.0, coupling_strength=0.0),
        2.0, 0.05, 0.5, (0.0,), distances, n=24,
    )
    strong = fractional_moment_probe(
        ModelConfig(d=1, L=48.0, h=1.0, coupling_strength=5.0),
        2.0, 0.05, 0.5, (0.0,), distances, n=24,
    )
    for est_free, est_strong in zip(free.estimates, strong.estimates):
        assert est_strong.mean < est_free.mean


def test_rate_positive_for_both_fractions():
    cfg = ModelConfig(d=1, L=48.0, h=1.0, coupling_strength=1.0)
    for s in (1.0 / 3.0, 0.5):
        probe = fractional_moment_probe(cfg, 0.5, 0.01, s, (0.0,), (2.0, 4.0, 8.0, 16.0), n=40)
        fit = decay_fit(
            [(d, est.mean) for d, est in zip(probe.distances, probe.estimates)]
        )
        assert fit.rate > 0.0
