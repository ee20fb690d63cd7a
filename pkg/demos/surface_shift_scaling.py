"""
How much spectrum does a boundary-condition flip move?

Puncture a strongly disordered planar box with a square hole, then compare
the operator with a Neumann hole surface against the Dirichlet one. The
per-sample shift is an integer bounded by the number of surface sites, so
its disorder average can grow at most like the surface l^(d-1) = l. The
script fits the measured exponent and checks the average is insensitive to
the outer box.
"""

import numpy as np

from specshift import ModelConfig, averaged_ssf, ssf_scaling_exponent

cfg = ModelConfig(d=2, L=16.0, h=1.0, coupling_strength=8.0)
energy = 4.0
sizes = [4.0, 6.0, 8.0, 12.0]

report = ssf_scaling_exponent(cfg, sizes, energy, n=100, threads=4)
print("hole side   box side   mean shift   stderr   surface sites")
for l, L, est, bound in zip(
    report.l_values, report.L_values, report.estimates, report.rank_bounds
):
    print(f"{l:9.0f} {L:10.0f} {est.mean:12.3f} {est.stderr:8.3f} {bound:11d}")

print(f"\nfitted exponent alpha = {report.alpha:.3f} +- {report.alpha_stderr:.3f} "
      f"(surface law predicts {report.target:g})")

# fix the hole and grow the box: the average shift should not care
print("\nfixed hole l = 4, growing the outer box:")
for L in (16.0, 24.0, 32.0):
    est = averaged_ssf(cfg, L, 4.0, (0.0, 0.0), energy, n=100, threads=4)
    print(f"  L = {L:4.0f}: mean shift {est.mean:.3f} +- {est.stderr:.3f}")
print("the shift lives on the hole surface, not in the bulk")

# per-sample values are integers inside the rank window
est = averaged_ssf(cfg, 16.0, 4.0, (0.0, 0.0), energy, n=20, threads=4)
vals = np.asarray(est.per_sample)
print(f"\n20 raw samples at l = 4: min {vals.min():g}, max {vals.max():g}, "
      f"all integers: {bool(np.all(vals == np.round(vals)))}")
