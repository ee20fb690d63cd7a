"""Domain construction, operator assembly, and profile covering checks."""

import numpy as np
import pytest

from specshift import (
    CoveringViolated,
    MissingCoupling,
    NonIntegralGrid,
    PunctureNotInterior,
    RangeError,
    UnsupportedDimension,
)
from specshift.grid import (
    DIRICHLET,
    NEUMANN,
    BoundarySpec,
    assemble_hamiltonian,
    assemble_laplacian,
    assemble_potential,
    continuum_box_eigenvalues,
    covering_bounds,
    cube_profile,
    gershgorin_floor,
    inner_boundary_site_count,
    make_domain,
    profile_footprint,
    required_couplings,
    tent_profile,
    unit_cube_profile,
)

DD = BoundarySpec(outer=DIRICHLET, inner=DIRICHLET)
NN = BoundarySpec(outer=NEUMANN, inner=NEUMANN)


def dirichlet_eigs_1d(m, h):
    k = np.arange(1, m + 1)
    return 2.0 * (1.0 - np.cos(k * np.pi / (m + 1))) / h**2


def neumann_eigs_1d(m, h):
    k = np.arange(m)
    return 2.0 * (1.0 - np.cos(k * np.pi / m)) / h**2


def test_domain_counts_and_coordinates():
    dom = make_domain(1, 4.0, 1.0)
    assert dom.site_count == 3
    assert np.allclose(dom.coordinates().ravel(), [-1.0, 0.0, 1.0])

    dom2 = make_domain(2, 4.0, 0.5)
    assert dom2.site_count == 7 * 7
    coords = dom2.coordinates()
    assert coords.shape == (49, 2)
    assert abs(coords).max() == pytest.approx(1.5)
    # lexicographic ordering by grid index
    assert np.all(np.diff(coords[:, 0]) >= 0)


def test_domain_rejects_bad_geometry():
    with pytest.raises(NonIntegralGrid):
        make_domain(1, 4.3, 1.0)
    with pytest.raises(UnsupportedDimension):
        make_domain(3, 4.0, 1.0)
    with pytest.raises(RangeError):
        make_domain(1, 1.0, 1.0)  # no interior sites


def test_puncture_removes_closed_cube():
    dom = make_domain(2, 10.0, 1.0, (2.0, (0.0, 0.0)))
    assert dom.site_count == 81 - 9
    assert dom.puncture.gap == pytest.approx(4.0)
    assert dom.puncture.gap_at_least_3
    # removed sites are exactly the 3x3 block around the origin
    coords = dom.coordinates()
    assert not np.any(np.all(np.abs(coords) <= 1.0 + 1e-12, axis=1))

    tight = make_domain(2, 8.0, 1.0, (2.0, (1.0, 0.0)))
    assert tight.puncture.gap == pytest.approx(2.0)
    assert not tight.puncture.gap_at_least_3

    with pytest.raises(PunctureNotInterior):
        make_domain(2, 6.0, 1.0, (6.0, (0.0, 0.0)))


def test_free_dirichlet_matrix_is_the_classic_stencil():
    dom = make_domain(1, 4.0, 1.0)
    ham = assemble_laplacian(dom, DD)
    dense = ham.matrix.toarray()
    assert np.array_equal(dense, [[2, -1, 0], [-1, 2, -1], [0, -1, 2]])
    assert ham.e_floor <= np.linalg.eigvalsh(dense).min() + 1e-12


def test_closed_form_spectra_1d():
    rng = np.random.default_rng(7)
    for _ in range(20):
        m = int(rng.integers(2, 40))
        h = rng.choice([1.0, 0.5, 0.25])
        dom = make_domain(1, (m + 1) * h, h)
        for bc, formula in ((DD, dirichlet_eigs_1d), (NN, neumann_eigs_1d)):
            got = np.linalg.eigvalsh(assemble_laplacian(dom, bc).matrix.toarray())
            assert np.allclose(got, np.sort(formula(m, h)), atol=1e-10)


def test_closed_form_spectra_2d_tensor_sum():
    dom = make_domain(2, 5.0, 1.0)
    got = np.linalg.eigvalsh(assemble_laplacian(dom, DD).matrix.toarray())
    one = dirichlet_eigs_1d(4, 1.0)
    want = np.sort((one[:, None] + one[None, :]).ravel())
    assert np.allclose(got, want, atol=1e-10)


def test_neumann_free_laplacian_annihilates_constants():
    dom = make_domain(2, 6.0, 1.0)
    ham = assemble_laplacian(dom, NN)
    assert np.allclose(ham.matrix @ np.ones(dom.site_count), 0.0, atol=1e-12)


def test_continuum_eigenvalues():
    got = continuum_box_eigenvalues((1.0,), DIRICHLET, 3)
    assert np.allclose(got, [np.pi**2, 4 * np.pi**2, 9 * np.pi**2])
    got = continuum_box_eigenvalues((1.0, 1.0), NEUMANN, 2)
    assert np.allclose(got, [0.0, np.pi**2])
    with pytest.raises(RangeError):
        continuum_box_eigenvalues((1.0,), DIRICHLET, 0)


def test_unit_cube_profile_covers_exactly():
    profile = unit_cube_profile()
    for d, L, h in ((1, 8.0, 0.5), (2, 6.0, 1.0), (2, 4.0, 0.25)):
        dom = make_domain(d, L, h)
        cmin, cmax = covering_bounds(profile, dom)
        assert cmin == pytest.approx(1.0)
        assert cmax == pytest.approx(1.0)


def test_sparse_cube_profile_violates_covering():
    dom = make_domain(1, 8.0, 0.5)
    with pytest.raises(CoveringViolated):
        covering_bounds(cube_profile(0.5), dom)


def test_tent_profile_footprint_and_bounds():
    dom = make_domain(1, 8.0, 0.5)
    profile = tent_profile(radius=1.0, height=2.0)
    cmin, cmax = covering_bounds(profile, dom)
    assert 0.0 < cmin <= cmax <= 4.0
    ks, F = profile_footprint(dom, profile)
    assert len(ks) == len(required_couplings(dom, profile))
    assert F.shape == (dom.site_count, len(ks))
    assert F.min() >= 0.0


def test_potential_assembly_and_missing_coupling():
    dom = make_domain(1, 4.0, 1.0)
    profile = unit_cube_profile()
    ks = required_couplings(dom, profile)
    couplings = {tuple(k): 1.0 for k in ks}
    v = assemble_potential(dom, None, profile, couplings, strength=3.0)
    assert np.allclose(v, 3.0)  # exact covering, all couplings one
    v = assemble_potential(dom, 0.5, profile, couplings, strength=1.0)
    assert np.allclose(v, 1.5)
    with pytest.raises(MissingCoupling):
        assemble_potential(dom, None, profile, {}, strength=1.0)


def test_background_validation():
    dom = make_domain(1, 4.0, 1.0)
    profile = unit_cube_profile()
    ks = required_couplings(dom, profile)
    couplings = {tuple(k): 0.0 for k in ks}
    v = assemble_potential(dom, lambda x: x[0] ** 2, profile, couplings, 1.0)
    assert np.allclose(v, [1.0, 0.0, 1.0])
    with pytest.raises(RangeError):
        assemble_potential(dom, np.ones(5), profile, couplings, 1.0)


def test_gershgorin_floor_bounds_spectrum():
    rng = np.random.default_rng(11)
    for _ in range(10):
        dom = make_domain(2, 6.0, 1.0)
        v = rng.random(dom.site_count)
        ham = assemble_hamiltonian(dom, DD, potential=v)
        eigs = np.linalg.eigvalsh(ham.matrix.toarray())
        assert gershgorin_floor(ham.matrix) <= eigs.min() + 1e-12


def test_inner_boundary_site_count_frozen_instance():
    dom = make_domain(2, 10.0, 1.0, (2.0, (0.0, 0.0)))
    assert inner_boundary_site_count(dom) == 12


def test_dump_roundtrip(tmp_path):
    dom = make_domain(1, 4.0, 1.0)
    ham = assemble_laplacian(dom, DD)
    dom.dump(tmp_path / "sites.txt")
    ham.dump(tmp_path / "ham.txt")
    sites = (tmp_path / "sites.txt").read_text().strip().splitlines()
    assert len(sites) == dom.site_count
    entries = (tmp_path / "ham.txt").read_text().strip().splitlines()
    assert len(entries) == ham.matrix.nnz
