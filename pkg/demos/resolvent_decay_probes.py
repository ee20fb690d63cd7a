"""Two views of exponential resolvent decay on a disordered chain.

Below the spectrum the decay is deterministic and the fitted rate can be
checked against the closed-form lattice rate arccosh(1 + h^2 |E| / 2) / h.
Inside the spectrum nothing decays for the free operator, but fractional
moments of the disordered resolvent still fall off exponentially; that is
the localization diagnostic.
"""

from specshift import (
    DIRICHLET,
    BoundarySpec,
    ModelConfig,
    assemble_laplacian,
    combes_thomas_profile,
    decay_fit,
    fractional_moment_probe,
    lattice_decay_rate,
    make_domain,
)

# deterministic regime: free chain, energies below the band
ham = assemble_laplacian(make_domain(1, 48.0, 1.0), BoundarySpec(outer=DIRICHLET))
print(f"free chain, spectral floor {ham.e_floor:.4f}")
for offset in (1.0, 4.0):
    fit = combes_thomas_profile(ham, ham.e_floor - offset, (0.0,), (2.0, 4.0, 8.0, 12.0))
    exact = lattice_decay_rate(offset - ham.e_floor, 1.0)
    print(f"  E = floor - {offset:g}: fitted rate {fit.rate:.4f} "
          f"(closed form {exact:.4f}), R^2 = {fit.r_squared:.5f}")
print("deeper below the band, faster the decay; the fit tracks the exact rate")

# stochastic regime: weak disorder, energy inside the band
cfg = ModelConfig(d=1, L=48.0, h=1.0, coupling_strength=1.0)
print("\ndisordered chain at E = 0.5 inside the band, eta = 0.01, 200 samples:")
for s in (1.0 / 3.0, 0.5):
    probe = fractional_moment_probe(
        cfg, 0.5, 0.01, s, (0.0,), (2.0, 4.0, 8.0, 16.0), n=200, threads=4
    )
    pts = list(zip(probe.distances, (e.mean for e in probe.estimates)))
    fit = decay_fit(pts)
    moments = "  ".join(f"{m:.4f}" for _, m in pts)
    print(f"  s = {s:.2f}: moments {moments}")
    print(f"          mu = {fit.rate:.4f}, R^2 = {fit.r_squared:.4f}")
print("fractional moments decay even where the free resolvent would not")
