"""Ohmic bath with an exponential cutoff at the footnote parameters.

The generators never touch the correlation function directly; they only
need its one-sided Fourier transform at the three Bohr frequencies of the
driven qubit, w and w +/- Omega.  This script prints both.
"""
import numpy as np

from oqsthermo import SpectralModel, bath_correlation, footnote_params, half_fourier

p = footnote_params()
model = SpectralModel.from_params(p)
print(f"beta = {p.beta:.3f}   cutoff = {model.omega_cutoff:.0f} Delta")

# The correlation decays on the scale 1/cutoff, and much more slowly
# (as 1/u^2) once the zero-temperature tail takes over.
for u in (0.0, 1e-3, 1e-2, 1.0):
    g = bath_correlation(u, model)
    print(f"G({u:g}) = {g.real:+.6e} {g.imag:+.6e}i")

w, om = p.omega_eff, p.ratio  # dimensionless: Omega in units of Delta
print("\nhalf-sided transform at the Bohr frequencies")
for label, nu in (("w", w), ("w+Omega", w + om), ("w-Omega", w - om)):
    for sign in (+1, -1):
        h = half_fourier(sign * nu, model)
        print(f"  nu = {'+' if sign > 0 else '-'}({label}){' ' * (8 - len(label))} gamma = {2 * h.real:.6e}  S = {h.imag:+.6e}")

# Rate asymmetry: emission dominates absorption by exp(beta nu).
h_up, h_dn = half_fourier(-(w - om), model), half_fourier(w - om, model)
print(f"\nlower sideband  log(down/up) = {np.log(h_dn.real / h_up.real):.3f}, beta*(w-Omega) = {p.beta * (w - om):.3f}")
