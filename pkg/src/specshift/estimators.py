"""Disorder-averaged counting estimators and trace-identity diagnostics.

Every estimator draws per-sample operators through a stateless coupling hash
and reduces in ascending sample-index order, so means and standard errors are
bitwise identical for a given master seed no matter how many worker threads
evaluate the samples. Standard errors are sample-sd/sqrt(n); significance
claims downstream use 3-standard-error separations.

Volume normalizations use the continuum box volume L^d, matching the
integrated-density-of-states convention rather than the active-site count.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    AssumptionViolated,
    CoveringViolated,
    DegenerateFit,
    DimensionTooLarge,
    InvalidDelta,
    RangeError,
    UnsupportedDimension,
)
from .grid import (
    DIRICHLET,
    NEUMANN,
    BoundarySpec,
    Hamiltonian,
    assemble_laplacian,
    covering_bounds,
    inner_boundary_site_count,
    make_domain,
)
from .model import ModelConfig, OperatorFactory
from .spectra import DENSE_DIM_LIMIT, count_at_or_below, ssf

#: reverse-Wegner runs are refused below this box size
REVERSE_WEGNER_MIN_L = 8.0
#: energy window where one-dimensional unit-strength runs are treated as localized
LOCALIZED_WINDOW_1D = (0.3, 0.7)
#: minimum coupling strength accepted for two-dimensional reverse-Wegner runs
STRONG_COUPLING_MIN_2D = 8.0

UPPER = "Upper"
LOWER = "Lower"


# -- Monte Carlo plumbing ----------------------------------------------------


@dataclass(frozen=True)
class McEstimate:
    """Mean and standard error of one Monte Carlo stream."""

    mean: float
    stderr: float
    n_samples: int
    seed: int
    per_sample: tuple[float, ...] | None = None


def _reduce(values, seed: int, keep_samples: bool = False) -> McEstimate:
    """Index-ordered reduction; deterministic for a fixed value sequence."""
    vals = [float(v) for v in values]
    n = len(vals)
    if n == 0:
        raise RangeError("cannot reduce an empty sample set")
    total = 0.0
    for v in vals:
        total += v
    mean = total / n
    if n > 1:
        ss = 0.0
        for v in vals:
            ss += (v - mean) ** 2
        stderr = math.sqrt(ss / (n - 1)) / math.sqrt(n)
    else:
        stderr = 0.0
    return McEstimate(
        mean=mean,
        stderr=stderr,
        n_samples=n,
        seed=seed,
        per_sample=tuple(vals) if keep_samples else None,
    )


def _map_samples(task, n: int, threads: int) -> list:
    """Evaluate task(0..n-1) into an index-addressed buffer."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(task, range(n)))
    return [task(s) for s in range(n)]


# -- counting estimators -----------------------------------------------------


def expected_counting_increment(
    cfg: ModelConfig,
    e1: float,
    e2: float,
    L: float | None = None,
    n: int = 100,
    threads: int = 1,
    keep_samples: bool = False,
) -> McEstimate:
    """Disorder average of N_L(e2) - N_L(e1) on the Dirichlet box."""
    if not e1 < e2:
        raise RangeError(f"need e1 < e2, got [{e1}, {e2}]")
    if n < 2:
        raise RangeError("need at least 2 samples for a standard error")
    factory = OperatorFactory(cfg, L=L, puncture=None)
    factory.free_operator(BoundarySpec())

    def task(s: int) -> float:
        ham = factory.hamiltonian(s)
        return count_at_or_below(ham, e2).count - count_at_or_below(ham, e1).count

    return _reduce(_map_samples(task, n, threads), cfg.seed, keep_samples)


@dataclass(frozen=True)
class WegnerReport:
    """One interval/volume cell of a counting-increment ratio scan."""

    e1: float
    e2: float
    L: float
    direction: str
    ratio: float
    ratio_stderr: float
    estimate: McEstimate
    notes: tuple[str, ...] = ()


def wegner_ratio(
    cfg: ModelConfig,
    intervals,
    L_values,
    n: int = 100,
    threads: int = 1,
) -> list[WegnerReport]:
    """Upper-bound scan: E[N_L(e2) - N_L(e1)] / (L^d (e2 - e1)) per cell."""
    reports = []
    for L in L_values:
        for e1, e2 in intervals:
            est = expected_counting_increment(cfg, e1, e2, L=L, n=n, threads=threads)
            denom = float(L) ** cfg.d * (e2 - e1)
            reports.append(
                WegnerReport(
                    e1=float(e1),
                    e2=float(e2),
                    L=float(L),
                    direction=UPPER,
                    ratio=est.mean / denom,
                    ratio_stderr=est.stderr / denom,
                    estimate=est,
                )
            )
    return reports


def _admissible_band_top(cfg: ModelConfig, L: float) -> float:
    """Upper edge of the guaranteed-filled energy set, 4d/h^2 + strength*C_u-.

    Uses the free-operator band [0, 4d/h^2] plus the covering floor of the
    bump sum; a sufficient condition, not the exact almost-sure spectrum.
    """
    domain = make_domain(cfg.d, L, cfg.h)
    try:
        c_minus, _ = covering_bounds(cfg.profile, domain)
    except CoveringViolated as exc:
        raise AssumptionViolated(f"covering hypothesis fails: {exc}") from exc
    return 4.0 * cfg.d / cfg.h**2 + cfg.coupling_strength * c_minus


def reverse_wegner_ratio(
    cfg: ModelConfig,
    intervals,
    L_values,
    n: int = 100,
    threads: int = 1,
    localized_window: tuple[float, float] | None = None,
    min_L: float = REVERSE_WEGNER_MIN_L,
) -> list[WegnerReport]:
    """Lower-bound scan of the same ratio, with the hypotheses enforced.

    Requires a density bounded below on [0, 1], intervals inside both the
    configured localized window and the interior of the guaranteed-filled
    band, and boxes above min_L. Two-dimensional runs additionally require
    strong coupling and carry a note that the window is empirical.
    """
    notes: tuple[str, ...] = ()
    if not cfg.density.satisfies_v1prime:
        raise AssumptionViolated("density is not bounded below on [0, 1]")
    if localized_window is None:
        if cfg.d == 1:
            localized_window = LOCALIZED_WINDOW_1D
        else:
            raise AssumptionViolated(
                "two-dimensional runs need an explicit localized window"
            )
    if cfg.d == 2:
        if cfg.coupling_strength < STRONG_COUPLING_MIN_2D:
            raise AssumptionViolated(
                f"two-dimensional runs need coupling strength >= {STRONG_COUPLING_MIN_2D}"
            )
        notes = ("empirical localized window, d = 2",)
    w_lo, w_hi = localized_window

    reports = []
    for L in L_values:
        if not float(L) > min_L:
            raise AssumptionViolated(f"L = {L} is not above the minimum box size {min_L}")
        top = _admissible_band_top(cfg, float(L))
        for e1, e2 in intervals:
            if not (w_lo <= e1 < e2 <= w_hi):
                raise AssumptionViolated(
                    f"interval [{e1}, {e2}] is outside the localized window {localized_window}"
                )
            if not (0.0 < e1 and e2 < top):
                raise AssumptionViolated(
                    f"interval [{e1}, {e2}] leaves the interior of the filled band (0, {top})"
                )
            est = expected_counting_increment(cfg, e1, e2, L=L, n=n, threads=threads)
            denom = float(L) ** cfg.d * (e2 - e1)
            reports.append(
                WegnerReport(
                    e1=float(e1),
                    e2=float(e2),
                    L=float(L),
                    direction=LOWER,
                    ratio=est.mean / denom,
                    ratio_stderr=est.stderr / denom,
                    estimate=est,
                    notes=notes,
                )
            )
    return reports


def idos_curve(
    cfg: ModelConfig,
    energies,
    L: float | None = None,
    n: int = 100,
    threads: int = 1,
) -> list[McEstimate]:
    """Finite-volume integrated density of states N_L(E)/L^d per energy."""
    energies = [float(e) for e in energies]
    factory = OperatorFactory(cfg, L=L, puncture=None)
    factory.free_operator(BoundarySpec())
    vol = factory.L**cfg.d

    def task(s: int) -> list[float]:
        ham = factory.hamiltonian(s)
        return [count_at_or_below(ham, e).count / vol for e in energies]

    rows = _map_samples(task, n, threads)
    return [_reduce([row[j] for row in rows], cfg.seed) for j in range(len(energies))]


def dos_estimate(
    cfg: ModelConfig,
    energy: float,
    epsilon: float,
    L: float | None = None,
    n: int = 100,
    threads: int = 1,
) -> McEstimate:
    """Finite-difference density of states [N(E+eps) - N(E)] / (L^d eps)."""
    if epsilon <= 0:
        raise RangeError("epsilon must be positive")
    est = expected_counting_increment(cfg, energy, energy + epsilon, L=L, n=n, threads=threads)
    box = cfg.L if L is None else float(L)
    denom = box**cfg.d * epsilon
    return McEstimate(
        mean=est.mean / denom,
        stderr=est.stderr / denom,
        n_samples=est.n_samples,
        seed=est.seed,
    )


# -- spectral shift estimators -----------------------------------------------


def averaged_ssf(
    cfg: ModelConfig,
    L: float,
    l: float,
    x0,
    energy: float,
    n: int = 100,
    threads: int = 1,
) -> McEstimate:
    """Disorder average of the puncture-surface shift xi(E; inner N, inner D).

    Both operators share the outer Dirichlet box and the same coupling draw;
    only the puncture surface switches between Neumann and Dirichlet. The
    per-sample values are retained on the estimate.
    """
    x0 = tuple(float(v) for v in np.atleast_1d(x0))
    factory = OperatorFactory(cfg, L=L, puncture=(float(l), x0))
    if not factory.domain.puncture.gap_at_least_3:
        warnings.warn(
            f"puncture-to-boundary gap {factory.domain.puncture.gap:g} is below 3; "
            "the surface-scaling hypothesis does not cover this geometry",
            RuntimeWarning,
            stacklevel=2,
        )
    factory.free_operator(BoundarySpec(outer=DIRICHLET, inner=NEUMANN))
    factory.free_operator(BoundarySpec(outer=DIRICHLET, inner=DIRICHLET))

    def task(s: int) -> float:
        ham_n, ham_d = factory.hamiltonian_pair(s, NEUMANN, DIRICHLET)
        return float(ssf(energy, ham_n, ham_d).xi)

    return _reduce(_map_samples(task, n, threads), cfg.seed, keep_samples=True)


@dataclass(frozen=True)
class SsfScalingReport:
    """Log-log fit of the averaged surface shift against the puncture size."""

    l_values: tuple[float, ...]
    L_values: tuple[float, ...]
    estimates: tuple[McEstimate, ...]
    rank_bounds: tuple[int, ...]
    used_l: tuple[float, ...]
    alpha: float
    alpha_stderr: float
    log_prefactor: float
    target: float


def default_L_rule(l: float) -> float:
    """Box size used for a puncture of side l when none is specified."""
    return 2.0 * l + 8.0


def ssf_scaling_exponent(
    cfg: ModelConfig,
    l_values,
    energy: float,
    n: int = 100,
    L_rule=None,
    x0=None,
    threads: int = 1,
) -> SsfScalingReport:
    """Fit E[xi] ~ C l^alpha over a family of punctures; target is d - 1."""
    l_values = [float(l) for l in l_values]
    if len(set(l_values)) < 3:
        raise RangeError("need at least 3 distinct puncture sizes")
    L_rule = L_rule or default_L_rule
    x0 = tuple(float(v) for v in np.atleast_1d(x0)) if x0 is not None else (0.0,) * cfg.d

    estimates = []
    bounds = []
    L_used = []
    for l in l_values:
        L = float(L_rule(l))
        L_used.append(L)
        est = averaged_ssf(cfg, L, l, x0, energy, n=n, threads=threads)
        estimates.append(est)
        domain = make_domain(cfg.d, L, cfg.h, (l, x0))
        bounds.append(inner_boundary_site_count(domain))

    keep = [i for i, est in enumerate(estimates) if est.mean > 0.0]
    if len(keep) < 2:
        raise DegenerateFit("fewer than 2 puncture sizes produced a positive mean shift")
    logs = np.log([l_values[i] for i in keep])
    logm = np.log([estimates[i].mean for i in keep])
    slope, intercept = np.polyfit(logs, logm, 1)
    resid = logm - (slope * logs + intercept)
    dof = len(keep) - 2
    if dof > 0:
        sxx = float(np.sum((logs - logs.mean()) ** 2))
        alpha_stderr = math.sqrt(float(resid @ resid) / dof / sxx)
    else:
        alpha_stderr = 0.0
    return SsfScalingReport(
        l_values=tuple(l_values),
        L_values=tuple(L_used),
        estimates=tuple(estimates),
        rank_bounds=tuple(bounds),
        used_l=tuple(l_values[i] for i in keep),
        alpha=float(slope),
        alpha_stderr=alpha_stderr,
        log_prefactor=float(intercept),
        target=float(cfg.d - 1),
    )


def kirsch_series(
    l: float, energy: float, L_values, h: float, d: int = 2
) -> list[tuple[float, int]]:
    """Free-operator surface shift against growing box size, fixed puncture.

    For the disorder-free stencil Laplacian the puncture shift tracks the
    huge eigenvalue degeneracies of the box and need not stay bounded in L;
    this series makes that growth observable.
    """
    if d != 2:
        raise UnsupportedDimension("the divergence series is a d = 2 diagnostic")
    out = []
    for L in L_values:
        domain = make_domain(d, float(L), h, (float(l), (0.0,) * d))
        ham_n = assemble_laplacian(domain, BoundarySpec(outer=DIRICHLET, inner=NEUMANN))
        ham_d = assemble_laplacian(domain, BoundarySpec(outer=DIRICHLET, inner=DIRICHLET))
        out.append((float(L), ssf(energy, ham_n, ham_d).xi))
    return out


# -- switch-function trace identity ------------------------------------------


def _switch(energy: float, eps: float, x: np.ndarray) -> np.ndarray:
    """Cubic smoothstep from 0 to 1 across [energy, energy + eps]."""
    u = np.clip((x - energy) / eps, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def _switch_deriv(energy: float, eps: float, x: np.ndarray) -> np.ndarray:
    """Derivative of the switch; bounded by 1.5/eps, supported on (E, E+eps)."""
    u = (x - energy) / eps
    inside = (u > 0.0) & (u < 1.0)
    return np.where(inside, 6.0 * u * (1.0 - u), 0.0) / eps


def birman_solomyak_sides(
    ham: Hamiltonian,
    u_vec: np.ndarray,
    energy: float,
    eps: float,
    delta: float,
    quad_order: int,
) -> tuple[float, float]:
    """Coupling-integral and trace-difference sides of the switch identity.

    Left side: integral over eta in [delta, 1-delta] of Tr(U f'(H + eta U)),
    by Gauss-Legendre quadrature with dense eigendecompositions at the nodes.
    Right side: Tr f(H + (1-delta) U) - Tr f(H + delta U).
    """
    if not 0.0 < delta < 0.25:
        raise InvalidDelta(f"delta = {delta} is outside (0, 1/4)")
    if eps <= 0.0:
        raise RangeError("eps must be positive")
    if quad_order < 1:
        raise RangeError("quadrature order must be at least 1")
    u_vec = np.asarray(u_vec, dtype=float)
    if u_vec.shape != (ham.dim,):
        raise RangeError(f"U has shape {u_vec.shape}, expected ({ham.dim},)")
    if np.any(u_vec < 0.0):
        raise RangeError("U must be nonnegative")
    if ham.dim > DENSE_DIM_LIMIT:
        raise DimensionTooLarge(
            f"dimension {ham.dim} exceeds the dense limit {DENSE_DIM_LIMIT}"
        )
    a_mat = ham.matrix.toarray()

    nodes, weights = np.polynomial.legendre.leggauss(quad_order)
    half = (1.0 - 2.0 * delta) / 2.0
    etas = delta + half * (nodes + 1.0)

    lhs = 0.0
    for eta, w in zip(etas, weights):
        vals, vecs = np.linalg.eigh(a_mat + eta * np.diag(u_vec))
        diag_u = np.einsum("ji,j,ji->i", vecs, u_vec, vecs)
        lhs += w * float(np.dot(_switch_deriv(energy, eps, vals), diag_u))
    lhs *= half

    top = np.linalg.eigvalsh(a_mat + (1.0 - delta) * np.diag(u_vec))
    bot = np.linalg.eigvalsh(a_mat + delta * np.diag(u_vec))
    rhs = float(np.sum(_switch(energy, eps, top)) - np.sum(_switch(energy, eps, bot)))
    return lhs, rhs


def birman_solomyak_residual(
    ham: Hamiltonian,
    u_vec: np.ndarray,
    energy: float,
    eps: float,
    delta: float,
    quad_order: int,
) -> float:
    """Absolute gap between the two sides of the switch trace identity."""
    lhs, rhs = birman_solomyak_sides(ham, u_vec, energy, eps, delta, quad_order)
    return abs(lhs - rhs)
