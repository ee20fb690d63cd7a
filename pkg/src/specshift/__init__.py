"""Numerical laboratory for alloy-type random Schrodinger operators.

Finite-difference boxes and punctured boxes, exact eigenvalue counting via
matrix inertia, spectral shift functions from operator pairs, and seeded
Monte Carlo estimators for the counting-function bounds, surface-scaling
laws, and resolvent-decay diagnostics of the disordered-lattice model.

Layers, bottom up: `grid` (domains, profiles, operator assembly), `disorder`
(counter-based coupling streams), `spectra` (inertia counts and shifts),
`model` (config plus per-sample operator factory), `estimators` (Monte Carlo
experiments), `localization` (resolvent block decay), `runner` (CLI and
deterministic persistence).
"""

from .disorder import DEFAULT_SEED, DisorderSampler, SingleSiteDensity, sample_couplings
from .errors import (
    AssumptionViolated,
    CoveringViolated,
    DegenerateFit,
    DimensionTooLarge,
    EnergyInSpectrum,
    FactorizationFailed,
    GeometryMismatch,
    InvalidDelta,
    MissingCoupling,
    NonIntegralGrid,
    ParseError,
    PunctureNotInterior,
    RangeError,
    SingularShift,
    SolveFailed,
    SpecshiftError,
    UnsupportedDimension,
)
from .estimators import (
    McEstimate,
    SsfScalingReport,
    WegnerReport,
    averaged_ssf,
    birman_solomyak_residual,
    birman_solomyak_sides,
    default_L_rule,
    dos_estimate,
    expected_counting_increment,
    idos_curve,
    kirsch_series,
    reverse_wegner_ratio,
    ssf_scaling_exponent,
    wegner_ratio,
)
from .grid import (
    DIRICHLET,
    NEUMANN,
    BoundarySpec,
    Domain,
    Hamiltonian,
    Puncture,
    SingleSiteProfile,
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
from .localization import (
    DecayFit,
    FmbProbe,
    combes_thomas_profile,
    decay_fit,
    fractional_moment_probe,
    lattice_decay_rate,
    resolvent_block_norm,
)
from .model import ModelConfig, OperatorFactory
from .runner import ExperimentConfig, ExperimentRecord, run_experiment, validate_config
from .spectra import (
    CountResult,
    SsfResult,
    bracketing_check,
    count_at_or_below,
    dense_eigenvalues,
    split_hamiltonian,
    ssf,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SEED",
    "DIRICHLET",
    "NEUMANN",
    "AssumptionViolated",
    "BoundarySpec",
    "CountResult",
    "CoveringViolated",
    "DecayFit",
    "DegenerateFit",
    "DimensionTooLarge",
    "DisorderSampler",
    "Domain",
    "EnergyInSpectrum",
    "ExperimentConfig",
    "ExperimentRecord",
    "FactorizationFailed",
    "FmbProbe",
    "GeometryMismatch",
    "Hamiltonian",
    "InvalidDelta",
    "McEstimate",
    "MissingCoupling",
    "ModelConfig",
    "NonIntegralGrid",
    "OperatorFactory",
    "ParseError",
    "Puncture",
    "PunctureNotInterior",
    "RangeError",
    "SingleSiteDensity",
    "SingleSiteProfile",
    "SingularShift",
    "SolveFailed",
    "SpecshiftError",
    "SsfResult",
    "SsfScalingReport",
    "UnsupportedDimension",
    "WegnerReport",
    "assemble_hamiltonian",
    "assemble_laplacian",
    "assemble_potential",
    "averaged_ssf",
    "birman_solomyak_residual",
    "birman_solomyak_sides",
    "bracketing_check",
    "combes_thomas_profile",
    "continuum_box_eigenvalues",
    "count_at_or_below",
    "covering_bounds",
    "cube_profile",
    "decay_fit",
    "default_L_rule",
    "dense_eigenvalues",
    "dos_estimate",
    "expected_counting_increment",
    "fractional_moment_probe",
    "gershgorin_floor",
    "idos_curve",
    "inner_boundary_site_count",
    "kirsch_series",
    "lattice_decay_rate",
    "make_domain",
    "profile_footprint",
    "required_couplings",
    "resolvent_block_norm",
    "reverse_wegner_ratio",
    "run_experiment",
    "sample_couplings",
    "split_hamiltonian",
    "ssf",
    "ssf_scaling_exponent",
    "tent_profile",
    "unit_cube_profile",
    "validate_config",
    "wegner_ratio",
]
