"""Model configuration shared by the Monte Carlo estimators.

A ModelConfig pins everything that defines the random operator family:
geometry defaults, background, single-site profile, coupling strength, the
coupling density, and the master seed. OperatorFactory caches the geometry
(domain, stencil, bump footprint) so that drawing sample s only costs one
coupling hash per lattice point plus a diagonal update.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .disorder import DEFAULT_SEED, DisorderSampler, SingleSiteDensity
from .grid import (
    DIRICHLET,
    BoundarySpec,
    Domain,
    Hamiltonian,
    SingleSiteProfile,
    _background_vector,
    assemble_laplacian,
    gershgorin_floor,
    make_domain,
    profile_footprint,
    unit_cube_profile,
)


@dataclass(frozen=True)
class ModelConfig:
    """One random-operator family: geometry defaults plus disorder law."""

    d: int
    L: float
    h: float
    coupling_strength: float = 1.0
    puncture: tuple[float, tuple[float, ...]] | None = None
    v0: object = None
    profile: SingleSiteProfile = field(default_factory=unit_cube_profile)
    density: SingleSiteDensity = field(default_factory=SingleSiteDensity.uniform)
    seed: int = DEFAULT_SEED

    @property
    def strong_disorder(self) -> bool:
        """Flag runs that leave the unit-coupling regime (strength > 1)."""
        return self.coupling_strength > 1.0

    def sampler(self) -> DisorderSampler:
        return DisorderSampler(seed=self.seed, density=self.density)


class OperatorFactory:
    """Per-sample Hamiltonians on one fixed geometry, cheap to draw.

    Geometry overrides (L, puncture) let estimator sweeps reuse one config
    while varying the box. All sample draws are pure functions of
    (config.seed, sample_index), so results never depend on evaluation order.
    """

    def __init__(
        self,
        cfg: ModelConfig,
        L: float | None = None,
        puncture: tuple[float, tuple[float, ...]] | None | str = "config",
    ) -> None:
        self.cfg = cfg
        self.L = cfg.L if L is None else float(L)
        punct = cfg.puncture if puncture == "config" else puncture
        self.domain: Domain = make_domain(cfg.d, self.L, cfg.h, punct)
        self.k_array, self.footprint = profile_footprint(self.domain, cfg.profile)
        self.v0_vec = _background_vector(self.domain, cfg.v0)
        self.sampler = cfg.sampler()
        self._free: dict[BoundarySpec, Hamiltonian] = {}
        self._off_rowsum: dict[BoundarySpec, np.ndarray] = {}

    def free_operator(self, bc: BoundarySpec) -> Hamiltonian:
        if bc not in self._free:
            ham = assemble_laplacian(self.domain, bc)
            self._free[bc] = ham
            diag = ham.matrix.diagonal()
            abs_rows = np.asarray(abs(ham.matrix).sum(axis=1)).ravel()
            self._off_rowsum[bc] = abs_rows - np.abs(diag)
        return self._free[bc]

    def potential(self, sample_index: int) -> np.ndarray:
        omega = self.sampler.values(self.k_array, sample_index)
        return self.v0_vec + self.cfg.coupling_strength * (self.footprint @ omega)

    def hamiltonian(self, sample_index: int, bc: BoundarySpec | None = None) -> Hamiltonian:
        bc = bc or BoundarySpec(outer=DIRICHLET, inner=DIRICHLET)
        free = self.free_operator(bc)
        v = self.potential(sample_index)
        matrix = free.matrix.copy()
        diag = free.matrix.diagonal() + v
        matrix.setdiag(diag)
        e_floor = float(np.min(diag - self._off_rowsum[bc]))
        return Hamiltonian(
            matrix=matrix, domain=self.domain, bc=bc, potential=v, e_floor=e_floor
        )

    def hamiltonian_pair(
        self, sample_index: int, inner_a: str, inner_b: str
    ) -> tuple[Hamiltonian, Hamiltonian]:
        """Two operators differing only in the puncture-surface condition,
        built from the same coupling draw."""
        bc_a = BoundarySpec(outer=DIRICHLET, inner=inner_a)
        bc_b = BoundarySpec(outer=DIRICHLET, inner=inner_b)
        v = self.potential(sample_index)
        out = []
        for bc in (bc_a, bc_b):
            free = self.free_operator(bc)
            matrix = free.matrix.copy()
            diag = free.matrix.diagonal() + v
            matrix.setdiag(diag)
            out.append(
                Hamiltonian(
                    matrix=matrix,
                    domain=self.domain,
                    bc=bc,
                    potential=v,
                    e_floor=float(np.min(diag - self._off_rowsum[bc])),
                )
            )
        return out[0], out[1]
