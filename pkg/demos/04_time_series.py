"""Entropy production along a trajectory.

Starting from the state used in the Redfield counterexample, sigma(t)
oscillates with the drive and dips below zero again and again before the
state relaxes.  The weak-coupling trajectory from the same state stays
positive.
"""
import numpy as np

from oqsthermo import build_redfield, build_weak_coupling, footnote_params, violation_intervals

p = footnote_params()
r0 = np.array([1.0, 0.0, -0.894, -0.447])
for g in (build_redfield(p), build_weak_coupling(p)):
    rep = violation_intervals(g, r0, 20 * p.period)
    print(f"{g.kind.value}: sigma(0) = {rep.sigma_t0:+.3e}, min sigma = {rep.min_sigma:+.3e} "
          f"at t = {rep.min_sigma_time:.2f}, {len(rep.negative_intervals)} negative intervals")
    for a, b in rep.negative_intervals[:5]:
        print(f"    [{a:7.3f}, {b:7.3f}]  ({(a / p.period):.2f} periods)")
