"""Redfield versus weak-coupling generator.

The Redfield generator is not completely positive: its Kossakowski matrix
has a negative eigenvalue and the Choi matrix of exp(-2tL) goes negative at
short times.  Averaging its bath part over the fast rotation gives back the
weak-coupling generator exactly.
"""
import numpy as np

from oqsthermo import (
    build_redfield,
    build_weak_coupling,
    choi_minimum_eigenvalue,
    footnote_params,
    kossakowski_spectrum,
    r3_equilibrium,
    secular_average,
    stationary_bloch,
)
from oqsthermo.qubit import trace_distance

np.set_printoptions(precision=5, suppress=True, linewidth=110)
p = footnote_params()
red, cp = build_redfield(p), build_weak_coupling(p)

print("Redfield dissipative block (units lambda^2 Delta)")
print(red.dissipative)
print("weak-coupling dissipative block")
print(cp.dissipative)

for g in (red, cp):
    print(f"{g.kind.value:14s} Kossakowski eigenvalues {kossakowski_spectrum(g).eigenvalues}")

ts = np.geomspace(1e-4, 10, 200)
choi = [choi_minimum_eigenvalue(red, t) for t in ts]
k = int(np.argmin(choi))
print(f"\nRedfield Choi minimum {choi[k]:.3e} at t = {ts[k]:.3f}/Delta")

diff = np.max(np.abs(secular_average(red).matrix - cp.matrix))
print(f"secular average of Redfield vs weak coupling: max |difference| = {diff:.1e}")

r_red, r_cp = stationary_bloch(red), stationary_bloch(cp)
print(f"\nstationary r3: Redfield {r_red[3]:.9f}, weak coupling {r_cp[3]:.9f}, closed form {r3_equilibrium(p):.9f}")
print(f"trace distance between them {trace_distance(r_red, r_cp):.3e}")
