"""Exact eigenvalue counting by matrix inertia, and spectral shift functions.

Counting N(E) = #{eigenvalues <= E} never builds spectra: the inertia of
H - E*I is read off a symmetric factorization (Sylvester's law). In one
dimension this is the Sturm pivot recurrence on the tridiagonal matrix; in
two dimensions a block-tridiagonal LDL^T sweep whose diagonal blocks are
factored densely with 1x1/2x2 (Bunch-Kaufman) pivots. Eigenvalues within
tau*scale of E count as <= E; on factorization breakdown the energy is
jittered upward and the retry recorded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import (
    DimensionTooLarge,
    FactorizationFailed,
    GeometryMismatch,
    RangeError,
)
from .grid import (
    DIRICHLET,
    Hamiltonian,
    _check_bc,
    _restriction,
    gershgorin_floor,
)

STURM = "Sturm"
SPARSE_LDL = "SparseLDL"
DENSE_ORACLE = "DenseOracle"

#: relative tie tolerance: eigenvalues within TIE_TAU*scale of E count as <= E
TIE_TAU = 1e-12
_JITTER = 1e-9
_MAX_RETRIES = 3

#: above this dimension the dense reference solver refuses to run
DENSE_DIM_LIMIT = 2000


@dataclass(frozen=True)
class CountResult:
    """Outcome of one inertia evaluation."""

    count: int
    energy: float
    method: str
    zero_pivot_count: int
    jitter_applied: float


@dataclass(frozen=True)
class SsfResult:
    """Finite-volume spectral shift between two operators at one energy."""

    xi: int
    energy: float
    count_a: CountResult
    count_b: CountResult


class _Breakdown(Exception):
    """Internal: factorization hit a pivot it cannot propagate past."""


def count_scale(hamiltonian: Hamiltonian) -> float:
    """Magnitude reference for pivot ties: max |diagonal| + 2d/h^2."""
    diag = hamiltonian.matrix.diagonal()
    return float(np.max(np.abs(diag))) + 2.0 * hamiltonian.domain.d / hamiltonian.domain.h**2


def _sturm_count(diag: np.ndarray, off: np.ndarray, energy: float, tol: float) -> tuple[int, int]:
    """Negative + tied pivots of the shifted tridiagonal LDL^T recurrence."""
    neg = 0
    zeros = 0
    prev = np.inf  # no subdiagonal term on the first row
    shifted = diag - energy
    off2 = off * off
    for i in range(len(shifted)):
        q = shifted[i]
        if i > 0:
            q -= off2[i - 1] / prev
        if abs(q) <= tol:
            zeros += 1
            q = -tol  # continue through the tie; sign choice keeps the count <= E
        elif q < 0.0:
            neg += 1
        prev = q
    return neg + zeros, zeros


def _ldl_inertia_and_solve(
    block: np.ndarray, rhs: np.ndarray | None, tol: float, last: bool
) -> tuple[int, int, np.ndarray | None]:
    """Dense symmetric-indefinite factorization: inertia and optional solve.

    Uses the LAPACK Bunch-Kaufman factorization (1x1/2x2 pivots). A tied 1x1
    pivot in a block that still has to be propagated is a breakdown; in the
    final block it is counted like the Sturm tie convention.
    """
    if block.shape[0] == 0:
        return 0, 0, None if rhs is None else rhs[:0]
    lu, d, perm = scipy.linalg.ldl(block, lower=True)
    neg = 0
    zeros = 0
    i = 0
    m = block.shape[0]
    while i < m:
        if i + 1 < m and d[i + 1, i] != 0.0:
            # 2x2 pivot block; classify its two eigenvalues directly
            a, b, c = d[i, i], d[i + 1, i + 1], d[i + 1, i]
            disc = np.hypot(a - b, 2.0 * c)
            for lam in ((a + b + disc) / 2.0, (a + b - disc) / 2.0):
                if abs(lam) <= tol:
                    zeros += 1
                elif lam < 0.0:
                    neg += 1
            i += 2
        else:
            piv = d[i, i]
            if abs(piv) <= tol:
                zeros += 1
            elif piv < 0.0:
                neg += 1
            i += 1
    if zeros and not last:
        raise _Breakdown
    if rhs is None:
        return neg, zeros, None
    # solve block @ X = rhs through the factors: block = lu @ d @ lu.T,
    # with lu[perm] unit lower triangular
    lt = lu[perm]
    y = scipy.linalg.solve_triangular(lt, rhs[perm], lower=True, unit_diagonal=True)
    z = _block_diag_solve(d, y)
    w = scipy.linalg.solve_triangular(lt.T, z, lower=False, unit_diagonal=True)
    x = np.empty_like(w)
    x[perm] = w
    if not np.all(np.isfinite(x)):
        raise _Breakdown
    return neg, zeros, x


def _block_diag_solve(d: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Solve with the 1x1/2x2 block-diagonal factor."""
    z = np.empty_like(y)
    m = d.shape[0]
    i = 0
    while i < m:
        if i + 1 < m and d[i + 1, i] != 0.0:
            a, b, c = d[i, i], d[i + 1, i + 1], d[i + 1, i]
            det = a * b - c * c
            if det == 0.0:
                raise _Breakdown
            z[i] = (b * y[i] - c * y[i + 1]) / det
            z[i + 1] = (a * y[i + 1] - c * y[i]) / det
            i += 2
        else:
            if d[i, i] == 0.0:
                raise _Breakdown
            z[i] = y[i] / d[i, i]
            i += 1
    return z


def _block_tridiag_count(h: Hamiltonian, energy: float, tol: float) -> tuple[int, int]:
    """Inertia of H - E*I by Schur complements along the leading grid axis.

    Congruence additivity: inertia(H - E) is the sum of the inertias of the
    Schur complements D_r = B_r - C_{r-1} D_{r-1}^{-1} C_{r-1}^T, where B_r is
    the diagonal block of grid row r and C_r couples row r to row r+1.
    """
    matrix = h.matrix
    groups = h.domain.row_groups()
    neg_total = 0
    zero_total = 0
    schur: np.ndarray | None = None
    coupling: np.ndarray | None = None
    for r, (s0, s1) in enumerate(groups):
        block = matrix[s0:s1, s0:s1].toarray()
        block[np.diag_indices_from(block)] -= energy
        if schur is not None and coupling is not None and coupling.size:
            block -= coupling @ schur
        last = r == len(groups) - 1
        if not last:
            n0, n1 = groups[r + 1]
            coupling = matrix[n0:n1, s0:s1].toarray()
            rhs = coupling.T if coupling.size else None
        else:
            coupling = None
            rhs = None
        neg, zeros, x = _ldl_inertia_and_solve(block, rhs, tol, last)
        neg_total += neg
        zero_total += zeros
        schur = x
    return neg_total + zero_total, zero_total


def dense_eigenvalues(hamiltonian: Hamiltonian, limit: int = DENSE_DIM_LIMIT) -> np.ndarray:
    """All eigenvalues by a dense symmetric solver (reference path)."""
    if hamiltonian.dim > limit:
        raise DimensionTooLarge(
            f"dimension {hamiltonian.dim} exceeds the dense limit {limit}"
        )
    return np.linalg.eigvalsh(hamiltonian.matrix.toarray())


def count_at_or_below(
    hamiltonian: Hamiltonian, energy: float, method: str | None = None
) -> CountResult:
    """Number of eigenvalues <= energy, via inertia of H - E*I."""
    if method is None:
        method = STURM if hamiltonian.domain.d == 1 else SPARSE_LDL
    if method not in (STURM, SPARSE_LDL, DENSE_ORACLE):
        raise RangeError(f"unknown counting method {method!r}")
    scale = count_scale(hamiltonian)
    tol = TIE_TAU * scale

    if method == DENSE_ORACLE:
        vals = dense_eigenvalues(hamiltonian)
        count = int(np.searchsorted(vals, energy + tol, side="right"))
        return CountResult(count, energy, method, 0, 0.0)

    if method == STURM:
        if hamiltonian.domain.d != 1:
            raise RangeError("the Sturm path requires a one-dimensional domain")
        diag = hamiltonian.matrix.diagonal()
        off = hamiltonian.matrix.diagonal(1) if hamiltonian.dim > 1 else np.empty(0)
        count, zeros = _sturm_count(diag, off, energy, tol)
        return CountResult(count, energy, method, zeros, 0.0)

    for attempt in range(_MAX_RETRIES + 1):
        shifted = energy + attempt * _JITTER * scale
        try:
            count, zeros = _block_tridiag_count(hamiltonian, shifted, tol)
        except (_Breakdown, np.linalg.LinAlgError, scipy.linalg.LinAlgError):
            continue
        return CountResult(count, energy, method, zeros, shifted - energy)
    raise FactorizationFailed(
        f"LDL^T factorization failed at E = {energy} after {_MAX_RETRIES} jitter retries"
    )


def _same_geometry(a: Hamiltonian, b: Hamiltonian) -> bool:
    da, db = a.domain, b.domain
    return (
        da.d == db.d
        and da.h == db.h
        and da.sites.shape == db.sites.shape
        and bool(np.array_equal(da.sites, db.sites))
    )


def ssf(energy: float, ham_a: Hamiltonian, ham_b: Hamiltonian) -> SsfResult:
    """Counting difference N(E; A) - N(E; B) for operators on one geometry."""
    if not _same_geometry(ham_a, ham_b):
        raise GeometryMismatch("spectral shift requires identical active-site geometry")
    ca = count_at_or_below(ham_a, energy)
    cb = count_at_or_below(ham_b, energy)
    return SsfResult(xi=ca.count - cb.count, energy=energy, count_a=ca, count_b=cb)


# -- interior-surface splitting ----------------------------------------------


def split_hamiltonian(
    hamiltonian: Hamiltonian, axis: int, cut: int, bc: str
) -> tuple[Hamiltonian, Hamiltonian]:
    """Decouple the operator across the surface between index cut and cut+1.

    The cut passes between lattice sites, so the decoupling that preserves
    operator ordering is the graph one: each severed bond of weight 1/h^2
    adds that weight to both endpoint diagonals for a Dirichlet surface and
    removes it for a Neumann surface.
    """
    _check_bc(bc)
    domain = hamiltonian.domain
    if not 0 <= axis < domain.d:
        raise RangeError(f"axis {axis} out of range for d = {domain.d}")
    lead = domain.sites[:, axis]
    if not lead.min() <= cut < lead.max():
        raise RangeError(f"cut {cut} does not split the domain along axis {axis}")
    low = lead <= cut
    inv_h2 = 1.0 / domain.h**2
    sign = 1.0 if bc == DIRICHLET else -1.0

    parts = []
    for keep, line, step in ((low, cut, 1), (~low, cut + 1, -1)):
        idx = np.flatnonzero(keep)
        sub = hamiltonian.matrix[idx][:, idx].tocsr()
        # sites on this side of the cut whose across-cut neighbor was active
        local = np.flatnonzero(domain.sites[idx, axis] == line)
        other = domain.sites[idx[local]].copy()
        other[:, axis] += step
        lost = np.array([domain.is_active(s) for s in other], dtype=bool)
        adjust = np.zeros(len(idx))
        adjust[local[lost]] = sign * inv_h2
        sub = (sub + sp.diags(adjust)).tocsr()
        parts.append(
            Hamiltonian(
                matrix=sub,
                domain=_restriction(domain, idx),
                bc=hamiltonian.bc,
                potential=hamiltonian.potential[idx],
                e_floor=gershgorin_floor(sub),
            )
        )
    return parts[0], parts[1]


def bracketing_check(
    ham_full: Hamiltonian,
    ham_inner: Hamiltonian,
    ham_outer: Hamiltonian,
    bc: str,
    energy: float,
) -> tuple[bool, tuple[int, int, int]]:
    """Verify the counting inequality for a decoupled pair at one energy.

    Dirichlet surface: N(E; full) >= N(E; inner) + N(E; outer).
    Neumann surface:   N(E; full) <= N(E; inner) + N(E; outer).
    """
    _check_bc(bc)
    full, inner, outer = ham_full.domain, ham_inner.domain, ham_outer.domain
    if full.d != inner.d or full.d != outer.d or full.h != inner.h or full.h != outer.h:
        raise GeometryMismatch("split parts live on a different grid than the full operator")
    merged = {tuple(s) for s in inner.sites} | {tuple(s) for s in outer.sites}
    if len(merged) != inner.site_count + outer.site_count or merged != {
        tuple(s) for s in full.sites
    }:
        raise GeometryMismatch("split parts do not partition the full active-site set")
    c_full = count_at_or_below(ham_full, energy).count
    c_in = count_at_or_below(ham_inner, energy).count
    c_out = count_at_or_below(ham_outer, energy).count
    if bc == DIRICHLET:
        holds = c_full >= c_in + c_out
    else:
        holds = c_full <= c_in + c_out
    return holds, (c_full, c_in, c_out)
