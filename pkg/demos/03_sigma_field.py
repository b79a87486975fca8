"""Entropy production at t = 0 over the equatorial plane r3 = 0.

With the weak-coupling generator sigma is positive everywhere in the ball.
With Redfield roughly two fifths of the disk has sigma < 0.  The text map
below shows the sign ('-' negative, '+' positive).
"""
import numpy as np

from oqsthermo import Reference, build_redfield, build_weak_coupling, footnote_params
from oqsthermo.thermo import equatorial_grid, sigma_many

p = footnote_params()
n = 41
states, inside = equatorial_grid(n)
for g in (build_redfield(p), build_weak_coupling(p)):
    sig = np.full(n * n, np.nan)
    sig[inside] = sigma_many(g, states[inside], Reference.stationary(g))
    frac = np.mean(sig[inside] < 0)
    print(f"\n{g.kind.value}: negative fraction {frac:.3f}, range [{np.nanmin(sig):.2e}, {np.nanmax(sig):.2e}]")
    grid = sig.reshape(n, n)
    for row in grid[::2]:
        print("  " + "".join(" " if np.isnan(v) else ("-" if v < 0 else "+") for v in row[::1]))
