"""Finite-difference boxes, punctured boxes, and Hamiltonian assembly.

Operators live on the interior lattice points of a centered box of side L
with spacing h, optionally with a closed inner cube of side l removed. The
second-order stencil gives -Delta + V; a Dirichlet face keeps the full
stencil weight on the diagonal (the absent neighbor is a zero boundary
value), a Neumann face drops it (mirror ghost point). The Dirichlet/Neumann
switch is therefore a diagonal, finite-rank perturbation supported on
boundary-adjacent sites, so surface bounds are exact rank bounds at the
lattice level; continuum behavior is probed by h-refinement, not assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    CoveringViolated,
    MissingCoupling,
    NonIntegralGrid,
    PunctureNotInterior,
    RangeError,
    UnsupportedDimension,
)

DIRICHLET = "dirichlet"
NEUMANN = "neumann"

#: minimum continuum gap between puncture boundary and box boundary required
#: by the surface-scaling estimates; smaller gaps only warn.
MIN_INNER_GAP = 3.0

_RATIO_TOL = 1e-9
_TIE_TOL = 1e-12


def _check_bc(name: str) -> str:
    if name not in (DIRICHLET, NEUMANN):
        raise RangeError(f"unknown boundary condition {name!r}")
    return name


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary conditions for the outer box and the puncture surface."""

    outer: str = DIRICHLET
    inner: str = DIRICHLET

    def __post_init__(self) -> None:
        _check_bc(self.outer)
        _check_bc(self.inner)


@dataclass(frozen=True)
class Puncture:
    """Closed inner cube |x - x0|_inf <= l/2 removed from the box."""

    l: float
    x0: tuple[float, ...]
    gap: float
    gap_at_least_3: bool


def _integral_ratio(num: float, den: float, what: str) -> int:
    ratio = num / den
    n = round(ratio)
    if abs(ratio - n) > _RATIO_TOL * max(1.0, abs(ratio)):
        raise NonIntegralGrid(f"{what} = {num} is not an integer multiple of h = {den}")
    return n


@dataclass(frozen=True)
class Domain:
    """Active lattice sites of a (possibly punctured) box.

    Sites are stored as integer multi-indices i in {1, ..., n-1}^d in
    lexicographic order; the coordinate of a site is i*h - L/2.
    """

    d: int
    L: float
    h: float
    n: int
    sites: np.ndarray
    puncture: Puncture | None = None
    is_box: bool = True
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        lookup = {tuple(int(v) for v in s): i for i, s in enumerate(self.sites)}
        object.__setattr__(self, "_index", lookup)

    @property
    def site_count(self) -> int:
        return len(self.sites)

    def coordinates(self) -> np.ndarray:
        """Continuum coordinates of the active sites, shape (N, d)."""
        return self.sites * self.h - self.L / 2.0

    def index_of(self, site: Sequence[int]) -> int:
        key = tuple(int(v) for v in site)
        if key not in self._index:
            raise KeyError(f"site {key} is not active")
        return self._index[key]

    def is_active(self, site: Sequence[int]) -> bool:
        return tuple(int(v) for v in site) in self._index

    def volume(self) -> float:
        """Continuum box volume L^d (the normalization used by densities)."""
        return self.L**self.d

    def row_groups(self) -> list[tuple[int, int]]:
        """Contiguous index ranges sharing the leading multi-index entry."""
        if self.d == 1:
            return [(0, self.site_count)]
        lead = self.sites[:, 0]
        cuts = np.flatnonzero(np.diff(lead)) + 1
        starts = np.concatenate(([0], cuts))
        ends = np.concatenate((cuts, [self.site_count]))
        return list(zip(starts.tolist(), ends.tolist()))

    def dump(self, path: str) -> None:
        """Write the site list as 'index coord...' lines, 17 significant digits."""
        coords = self.coordinates()
        with open(path, "w", encoding="ascii") as fh:
            for i, row in enumerate(coords):
                vals = " ".join(format(v, ".17g") for v in row)
                fh.write(f"{i} {vals}\n")


def make_domain(
    d: int,
    L: float,
    h: float,
    puncture: tuple[float, Sequence[float]] | None = None,
) -> Domain:
    """Enumerate the active sites of the box Lambda_L, minus any puncture."""
    if d not in (1, 2):
        raise UnsupportedDimension(f"d = {d}; supported dimensions are 1 and 2")
    if L <= 0 or h <= 0:
        raise RangeError("L and h must be positive")
    n = _integral_ratio(L, h, "L")
    if n < 2:
        raise RangeError(f"L/h = {n}; the box has no interior sites")

    axes = [np.arange(1, n, dtype=np.int64)] * d
    grids = np.meshgrid(*axes, indexing="ij")
    sites = np.stack([g.ravel() for g in grids], axis=1)

    punct = None
    if puncture is not None:
        l, x0 = puncture
        x0 = tuple(float(v) for v in x0)
        if len(x0) != d:
            raise RangeError(f"puncture center has {len(x0)} coordinates, expected {d}")
        _integral_ratio(l, h, "l")
        gaps = [L / 2.0 - abs(c) - l / 2.0 for c in x0]
        gap = min(gaps)
        if gap <= 0:
            raise PunctureNotInterior(
                f"inner cube of side {l} at {x0} touches the boundary of the box (gap {gap})"
            )
        coords = sites * h - L / 2.0
        removed = np.max(np.abs(coords - np.asarray(x0)), axis=1) <= l / 2.0 + _RATIO_TOL * h
        sites = sites[~removed]
        punct = Puncture(l=float(l), x0=x0, gap=gap, gap_at_least_3=gap >= MIN_INNER_GAP)

    return Domain(d=d, L=float(L), h=float(h), n=n, sites=sites, puncture=punct)


def _restriction(parent: Domain, keep: np.ndarray) -> Domain:
    """Domain view on a subset of a parent's sites (same ordering)."""
    return Domain(
        d=parent.d,
        L=parent.L,
        h=parent.h,
        n=parent.n,
        sites=parent.sites[keep],
        puncture=parent.puncture,
        is_box=False,
    )


# -- single-site profiles ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class SingleSiteProfile:
    """Nonnegative bump u evaluated at offsets x - k, max-norm support radius."""

    kind: str
    radius: float
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def __call__(self, offsets: np.ndarray) -> np.ndarray:
        offsets = np.atleast_2d(np.asarray(offsets, dtype=float))
        return self.func(offsets)


def unit_cube_profile() -> SingleSiteProfile:
    """Indicator of the unit max-norm cube, half-open so the translates tile.

    The half-open convention [-1/2, 1/2) per axis makes sum_k u(x - k) == 1
    exactly for every grid point, including points sitting on cube faces.
    """

    def func(y: np.ndarray) -> np.ndarray:
        inside = np.all((y >= -0.5) & (y < 0.5), axis=1)
        return inside.astype(float)

    return SingleSiteProfile(kind="unit_cube", radius=0.5, func=func)


def cube_profile(side: float) -> SingleSiteProfile:
    """Indicator of the closed cube of the given side (gaps if side < 1)."""
    if side <= 0:
        raise RangeError("cube side must be positive")
    half = side / 2.0

    def func(y: np.ndarray) -> np.ndarray:
        inside = np.max(np.abs(y), axis=1) <= half
        return inside.astype(float)

    return SingleSiteProfile(kind="cube", radius=half, func=func)


def tent_profile(radius: float = 1.0, height: float = 1.0) -> SingleSiteProfile:
    """Piecewise-linear bump height*(1 - |y|_inf/radius)_+."""
    if radius <= 0 or height <= 0:
        raise RangeError("tent radius and height must be positive")

    def func(y: np.ndarray) -> np.ndarray:
        r = np.max(np.abs(y), axis=1) / radius
        return height * np.clip(1.0 - r, 0.0, None)

    return SingleSiteProfile(kind="tent", radius=radius, func=func)


def _lattice_box(domain: Domain, radius: float) -> np.ndarray:
    """Integer lattice points k whose bump of the given radius can reach a site."""
    coords = domain.coordinates()
    lows = [math.ceil(coords[:, j].min() - radius - _RATIO_TOL) for j in range(domain.d)]
    highs = [math.floor(coords[:, j].max() + radius + _RATIO_TOL) for j in range(domain.d)]
    axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in zip(lows, highs)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def profile_footprint(
    domain: Domain, profile: SingleSiteProfile
) -> tuple[np.ndarray, sp.csr_matrix]:
    """Lattice points with support on the domain and the site-value matrix.

    Returns (k_array, F) with F[i, m] = u(x_i - k_m); only lattice points with
    at least one nonzero value are kept.
    """
    coords = domain.coordinates()
    candidates = _lattice_box(domain, profile.radius)
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    keep: list[int] = []
    for m, k in enumerate(candidates):
        near = np.flatnonzero(np.max(np.abs(coords - k), axis=1) <= profile.radius + _RATIO_TOL)
        if near.size == 0:
            continue
        u = profile(coords[near] - k)
        nz = np.flatnonzero(u > 0.0)
        if nz.size == 0:
            continue
        keep.append(m)
        rows.append(near[nz])
        cols.append(np.full(nz.size, len(keep) - 1, dtype=np.int64))
        vals.append(u[nz])
    k_array = candidates[keep] if keep else np.empty((0, domain.d), dtype=np.int64)
    if rows:
        data = (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols)))
        footprint = sp.csr_matrix(data, shape=(domain.site_count, len(keep)))
    else:
        footprint = sp.csr_matrix((domain.site_count, 0))
    return k_array, footprint


def required_couplings(domain: Domain, profile: SingleSiteProfile) -> np.ndarray:
    """Lattice points whose bump intersects the domain, shape (M, d)."""
    k_array, _ = profile_footprint(domain, profile)
    return k_array


def covering_bounds(profile: SingleSiteProfile, domain: Domain) -> tuple[float, float]:
    """Exact min and max over active sites of sum_k u(x - k)."""
    _, footprint = profile_footprint(domain, profile)
    total = np.asarray(footprint.sum(axis=1)).ravel()
    c_minus = float(total.min()) if total.size else 0.0
    c_plus = float(total.max()) if total.size else 0.0
    if c_minus <= 0.0:
        raise CoveringViolated(
            f"profile {profile.kind!r} leaves grid points uncovered (min sum {c_minus})"
        )
    return c_minus, c_plus


# -- Hamiltonians ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Sparse symmetric operator on a domain with its assembly metadata."""

    matrix: sp.csr_matrix
    domain: Domain
    bc: BoundarySpec
    potential: np.ndarray
    e_floor: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dump(self, path: str) -> None:
        """Write the matrix as 'row col value' lines, 17 significant digits."""
        coo = self.matrix.tocoo()
        with open(path, "w", encoding="ascii") as fh:
            for i, j, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{i} {j} {format(v, '.17g')}\n")


def gershgorin_floor(matrix: sp.spmatrix) -> float:
    """Row-circle lower bound for the smallest eigenvalue."""
    diag = matrix.diagonal()
    abs_rows = np.asarray(abs(matrix).sum(axis=1)).ravel()
    return float(np.min(diag - (abs_rows - np.abs(diag))))


def _neighbor_table(domain: Domain) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Active neighbor pairs and missing-neighbor counts per boundary kind.

    Returns (pairs, missing_outer, missing_inner): pairs is an (E, 2) array of
    site indices with i < j; the two count arrays give, per site, how many of
    its 2d stencil neighbors are absent across the outer box boundary and into
    the puncture respectively.
    """
    n = domain.n
    shape = (n + 1,) * domain.d
    active_id = -np.ones(shape, dtype=np.int64)
    active_id[tuple(domain.sites.T)] = np.arange(domain.site_count)

    pairs: list[np.ndarray] = []
    missing_outer = np.zeros(domain.site_count, dtype=np.int64)
    missing_inner = np.zeros(domain.site_count, dtype=np.int64)
    for axis in range(domain.d):
        for step in (-1, 1):
            nb = domain.sites.copy()
            nb[:, axis] += step
            inside = (nb[:, axis] >= 1) & (nb[:, axis] <= n - 1)
            outside = np.flatnonzero(~inside)
            missing_outer[outside] += 1
            idx = np.flatnonzero(inside)
            nb_id = active_id[tuple(nb[idx].T)]
            inactive = nb_id < 0
            missing_inner[idx[inactive]] += 1
            if step == 1:
                src = idx[~inactive]
                pairs.append(np.stack([src, nb_id[~inactive]], axis=1))
    pair_arr = np.concatenate(pairs, axis=0) if pairs else np.empty((0, 2), dtype=np.int64)
    return pair_arr, missing_outer, missing_inner


def inner_boundary_site_count(domain: Domain) -> int:
    """Active sites with at least one stencil neighbor inside the puncture.

    This is the rank of the diagonal perturbation that switches the puncture
    surface between Dirichlet and Neumann, hence an exact upper bound for the
    counting difference of the two operators.
    """
    _, _, missing_inner = _neighbor_table(domain)
    return int(np.count_nonzero(missing_inner))


def assemble_hamiltonian(
    domain: Domain,
    bc: BoundarySpec,
    potential: np.ndarray | None = None,
) -> Hamiltonian:
    """Stencil matrix -Delta_h + diag(v) under the given boundary conditions."""
    inv_h2 = 1.0 / domain.h**2
    pairs, missing_outer, missing_inner = _neighbor_table(domain)

    if potential is None:
        v = np.zeros(domain.site_count)
    else:
        v = np.asarray(potential, dtype=float)
        if v.shape != (domain.site_count,):
            raise RangeError(
                f"potential has shape {v.shape}, expected ({domain.site_count},)"
            )

    diag = np.full(domain.site_count, 2.0 * domain.d * inv_h2)
    if bc.outer == NEUMANN:
        diag -= missing_outer * inv_h2
    if bc.inner == NEUMANN:
        diag -= missing_inner * inv_h2
    diag += v

    rows = np.concatenate([pairs[:, 0], pairs[:, 1], np.arange(domain.site_count)])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0], np.arange(domain.site_count)])
    data = np.concatenate([
        np.full(2 * len(pairs), -inv_h2),
        diag,
    ])
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(domain.site_count,) * 2)
    matrix.sum_duplicates()
    return Hamiltonian(
        matrix=matrix,
        domain=domain,
        bc=bc,
        potential=v,
        e_floor=gershgorin_floor(matrix),
    )


def assemble_laplacian(domain: Domain, bc: BoundarySpec) -> Hamiltonian:
    """Free stencil operator (zero potential)."""
    return assemble_hamiltonian(domain, bc, None)


def _background_vector(domain: Domain, v0) -> np.ndarray:
    """Sample the periodic background on the active sites."""
    if v0 is None:
        return np.zeros(domain.site_count)
    if np.isscalar(v0):
        return np.full(domain.site_count, float(v0))
    if callable(v0):
        return np.asarray([float(v0(x)) for x in domain.coordinates()])
    samples = np.asarray(v0, dtype=float)
    if samples.ndim != domain.d:
        raise RangeError(
            f"per-cell background has {samples.ndim} axes, expected {domain.d}"
        )
    m = samples.shape[0]
    if any(s != m for s in samples.shape):
        raise RangeError("per-cell background must be sampled on a cubic grid")
    if abs(m * domain.h - 1.0) > _RATIO_TOL:
        raise RangeError(
            f"per-cell background needs m = 1/h samples per axis; got {m} with h = {domain.h}"
        )
    # position in sample units; must land on sample points for tiling to make sense
    t = domain.coordinates() / domain.h
    ti = np.rint(t).astype(np.int64)
    if np.max(np.abs(t - ti)) > _RATIO_TOL:
        raise RangeError("sites do not align with the unit-cell sample grid (L/h must be even)")
    idx = tuple((ti[:, j] % m) for j in range(domain.d))
    return samples[idx]


def _coupling_key(k) -> tuple[int, ...]:
    if np.isscalar(k):
        return (int(k),)
    return tuple(int(v) for v in k)


def assemble_potential(
    domain: Domain,
    v0,
    profile: SingleSiteProfile,
    couplings: Mapping,
    strength: float = 1.0,
) -> np.ndarray:
    """Alloy potential v(x) = V0(x) + strength * sum_k omega_k u(x - k)."""
    k_array, footprint = profile_footprint(domain, profile)
    table = {_coupling_key(k): float(w) for k, w in couplings.items()}
    omega = np.empty(len(k_array))
    for m, k in enumerate(k_array):
        key = tuple(int(v) for v in k)
        if key not in table:
            raise MissingCoupling(f"no coupling for lattice point {key}")
        omega[m] = table[key]
    return _background_vector(domain, v0) + strength * (footprint @ omega)


# -- reference spectra -------------------------------------------------------


def continuum_box_eigenvalues(
    lengths: Sequence[float], bc: str, count: int
) -> np.ndarray:
    """Smallest eigenvalues of -Delta on a continuum box, with multiplicity.

    Modes are sum_j (pi k_j / L_j)^2 with k_j >= 1 for Dirichlet and k_j >= 0
    for Neumann.
    """
    _check_bc(bc)
    lengths = [float(v) for v in lengths]
    if count < 1:
        raise RangeError("count must be at least 1")
    if any(v <= 0 for v in lengths):
        raise RangeError("box side lengths must be positive")
    lo = 1 if bc == DIRICHLET else 0
    l_max = max(lengths)
    k_top = max(2, lo + 1)
    while True:
        axes = [np.arange(lo, k_top + 1, dtype=float) * (math.pi / lj) for lj in lengths]
        grids = np.meshgrid(*axes, indexing="ij")
        vals = np.sort(sum(g**2 for g in grids).ravel())
        # any mode outside the enumerated block exceeds this threshold
        if len(vals) >= count and vals[count - 1] < (math.pi * (k_top + 1) / l_max) ** 2:
            return vals[:count]
        k_top *= 2
