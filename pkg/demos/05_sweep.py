"""How often does Redfield violate the second law?

Fraction of random states in the Bloch ball with sigma(0) < 0, over a grid
of temperatures and drive strengths.  Runs in parallel; set
OQS_NUM_WORKERS to limit the number of processes.
"""
from oqsthermo import footnote_params, parameter_sweep
from oqsthermo.params import SWEEP_RATIOS, SWEEP_TEMPERATURES

cells = parameter_sweep(SWEEP_TEMPERATURES, SWEEP_RATIOS, footnote_params(), n_states=5000)
print(f"{'T [K]':>8} {'Omega/Delta':>12} {'Redfield':>9} {'CP':>6} {'repeated in time':>17}")
for c in cells:
    if c.error:
        print(f"{c.temperature:8g} {c.ratio:12g}  failed: {c.error}")
        continue
    print(f"{c.temperature:8g} {c.ratio:12g} {c.redfield.t0_fraction_negative:9.4f} "
          f"{c.weak_coupling.t0_fraction_negative:6.3f} {str(c.has_time_violation):>17}")
