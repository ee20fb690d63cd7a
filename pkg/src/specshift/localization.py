"""Resolvent decay probes: fractional moments and below-spectrum profiles.

Block norms ||chi_x (H - z)^{-1} chi_y|| are measured between unit cubes of
active sites. Values carry the h^d volume factor so profiles taken at
different spacings are comparable; the unscaled lattice norm is what the
trivial bound 1/|Im z| controls and is checked sample by sample. Fractional
moment estimates at a single energy on one box are a localization heuristic,
not a proof, and the probe results say so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DegenerateFit,
    EnergyInSpectrum,
    RangeError,
    SingularShift,
    SolveFailed,
)
from .grid import BoundarySpec, Hamiltonian
from .model import ModelConfig, OperatorFactory
from .estimators import McEstimate, _map_samples, _reduce

_BLOCK_RADIUS = 0.5
_COORD_TOL = 1e-9
_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential fit value ~ exp(log_prefactor - rate*dist)."""

    rate: float
    log_prefactor: float
    r_squared: float
    distances: tuple[float, ...]
    points: tuple[tuple[float, float], ...] | None = None


@dataclass(frozen=True)
class FmbProbe:
    """Fractional-moment scan E[||chi_x R chi_y||^s] along one axis."""

    energy: float
    eta: float
    s: float
    x0: tuple[float, ...]
    axis: int
    distances: tuple[float, ...]
    pairs: tuple[tuple[tuple[float, ...], tuple[float, ...]], ...]
    estimates: tuple[McEstimate, ...]
    raw_means: tuple[float, ...]
    heuristic: bool = True


def _block_sites(ham: Hamiltonian, center) -> np.ndarray:
    """Indices of active sites within max-norm distance 1/2 of the center."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.shape != (ham.domain.d,):
        raise RangeError(f"block center needs {ham.domain.d} coordinates")
    coords = ham.domain.coordinates()
    return np.flatnonzero(
        np.max(np.abs(coords - center), axis=1) <= _BLOCK_RADIUS + _COORD_TOL
    )


def _check_shift(ham: Hamiltonian, z: complex) -> complex:
    z = complex(z)
    if z.imag == 0.0 and z.real >= ham.e_floor:
        raise SingularShift(
            f"real shift {z.real} is not strictly below the spectral floor {ham.e_floor}"
        )
    return z


def _resolvent_columns(ham: Hamiltonian, z: complex, col_idx: np.ndarray) -> np.ndarray:
    """Columns of (H - z)^{-1} for the given indices, residual-checked."""
    dim = ham.dim
    shifted = (ham.matrix - z * sp.identity(dim, format="csr")).tocsc()
    lu = spla.splu(shifted)
    rhs = np.zeros((dim, len(col_idx)), dtype=shifted.dtype)
    rhs[col_idx, np.arange(len(col_idx))] = 1.0
    sol = lu.solve(rhs)
    resid = np.linalg.norm(shifted @ sol - rhs)
    if not np.isfinite(resid) or resid > _RESIDUAL_TOL * max(1.0, np.linalg.norm(rhs)):
        raise SolveFailed(f"resolvent solve residual {resid:.3e} exceeds tolerance")
    return sol


def resolvent_block_norm(ham: Hamiltonian, z, x, y) -> float:
    """Volume-scaled operator norm of the x-to-y block of (H - z)^{-1}.

    Returns h^d times the spectral norm of the lattice block; empty blocks
    give 0. The shift must be complex or strictly below the spectral floor.
    """
    z = _check_shift(ham, z)
    bx = _block_sites(ham, x)
    by = _block_sites(ham, y)
    if bx.size == 0 or by.size == 0:
        return 0.0
    cols = _resolvent_columns(ham, z, by)
    block = cols[bx, :]
    raw = float(np.linalg.svd(block, compute_uv=False)[0])
    return raw * ham.domain.h**ham.domain.d


def _axis_targets(x0: np.ndarray, distances, axis: int, d: int) -> list[np.ndarray]:
    targets = []
    for dist in distances:
        y = x0.copy()
        y[axis] += float(dist)
        targets.append(y)
    return targets


def _profile_norms(
    ham: Hamiltonian, z: complex, x0, distances, axis: int
) -> tuple[list[float], list[tuple[tuple[float, ...], tuple[float, ...]]]]:
    """Raw block norms from x0 to x0 + dist*e_axis, one factorization total.

    The resolvent of a real symmetric matrix is complex symmetric, so the
    (x, y) block is the transpose of the (y, x) block and one set of source
    columns serves every distance.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    bx = _block_sites(ham, x0)
    if bx.size == 0:
        raise RangeError(f"no active sites within the unit cube at {tuple(x0)}")
    cols = _resolvent_columns(ham, z, bx)
    norms = []
    pairs = []
    for y in _axis_targets(x0, distances, axis, ham.domain.d):
        by = _block_sites(ham, y)
        if by.size == 0:
            norms.append(0.0)
        else:
            block = cols[by, :].T  # rows chi_x, columns chi_y
            norms.append(float(np.linalg.svd(block, compute_uv=False)[0]))
        pairs.append((tuple(x0), tuple(y)))
    return norms, pairs


def fractional_moment_probe(
    cfg: ModelConfig,
    energy: float,
    eta: float,
    s: float,
    x0,
    distances,
    n: int = 100,
    threads: int = 1,
    axis: int = 0,
) -> FmbProbe:
    """Monte Carlo fractional moments of resolvent blocks along one axis.

    Each sample checks the deterministic bound ||block|| <= 1/|eta| before
    contributing; a violation aborts the probe since it can only come from a
    failed solve.
    """
    if not 0.0 < s < 1.0:
        raise RangeError(f"fractional order s = {s} must lie in (0, 1)")
    if eta == 0.0:
        raise SingularShift("eta must be nonzero for a spectral-axis probe")
    distances = [float(v) for v in distances]
    z = complex(energy, eta)
    factory = OperatorFactory(cfg, puncture=None)
    factory.free_operator(BoundarySpec())
    scale = factory.domain.h**factory.domain.d
    bound = (1.0 + 1e-8) / abs(eta)

    def task(sample: int) -> list[float]:
        ham = factory.hamiltonian(sample)
        norms, _ = _profile_norms(ham, z, x0, distances, axis)
        for raw in norms:
            if raw > bound:
                raise SolveFailed(
                    f"lattice block norm {raw:.6e} exceeds the bound 1/|eta| = {1/abs(eta):.6e}"
                )
        return norms

    rows = _map_samples(task, n, threads)
    estimates = []
    raw_means = []
    for j in range(len(distances)):
        raws = [row[j] for row in rows]
        estimates.append(_reduce([(r * scale) ** s for r in raws], cfg.seed))
        raw_means.append(_reduce(raws, cfg.seed).mean)

    x0t = tuple(float(v) for v in np.atleast_1d(x0))
    pair_list = []
    for dist in distances:
        y = list(x0t)
        y[axis] += dist
        pair_list.append((x0t, tuple(y)))
    return FmbProbe(
        energy=float(energy),
        eta=float(eta),
        s=float(s),
        x0=x0t,
        axis=axis,
        distances=tuple(distances),
        pairs=tuple(pair_list),
        estimates=tuple(estimates),
        raw_means=tuple(raw_means),
    )


def decay_fit(points) -> DecayFit:
    """Fit log(value) = log_prefactor - rate*distance by least squares."""
    pts = [(float(a), float(b)) for a, b in points]
    if len(pts) < 3:
        raise DegenerateFit("need at least 3 points for a decay fit")
    if any(v <= 0.0 for _, v in pts):
        raise DegenerateFit("decay fit needs strictly positive values")
    dists = np.array([a for a, _ in pts])
    logs = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(dists, logs, 1)
    pred = slope * dists + intercept
    ss_res = float(np.sum((logs - pred) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return DecayFit(
        rate=float(-slope),
        log_prefactor=float(intercept),
        r_squared=r2,
        distances=tuple(dists.tolist()),
        points=tuple(pts),
    )


def combes_thomas_profile(
    ham: Hamiltonian, energy: float, x0, distances, axis: int = 0
) -> DecayFit:
    """Exponential fit of block-norm decay at a real energy below the floor."""
    if not float(energy) < ham.e_floor:
        raise EnergyInSpectrum(
            f"energy {energy} is not strictly below the spectral floor {ham.e_floor}"
        )
    distances = [float(v) for v in distances]
    norms, pairs = _profile_norms(ham, complex(energy, 0.0), x0, distances, axis)
    scale = ham.domain.h**ham.domain.d
    return decay_fit(zip(distances, [v * scale for v in norms]))


def lattice_decay_rate(energy_below: float, h: float) -> float:
    """Exact decay rate of the free one-dimensional lattice resolvent.

    For the free stencil operator and a shift a distance |E| below the band
    floor, off-diagonal resolvent entries fall like exp(-rate * distance)
    with rate = arccosh(1 + h^2 |E| / 2) / h.
    """
    if energy_below <= 0:
        raise RangeError("pass the positive distance below the band floor")
    return math.acosh(1.0 + h * h * energy_below / 2.0) / h
