"""Linear gain/loss pair: spectrum across the exceptional point and energy growth.

Run with ``python3 demos/linear_dimer.py``.
"""
import numpy as np

from nhbattery import IntegrationConfig, LinearSolution, integrate, linear_eigenfrequencies, pt_linear
from nhbattery.analytic import transfer_energy_closed_form

kappa = 0.5
print("gamma   region     w1                 w2")
for gamma in np.linspace(0.0, 1.0, 11):
    es = linear_eigenfrequencies(pt_linear(kappa, gamma))
    w1, w2 = es.frequencies
    print(f"{gamma:5.2f}   {str(es.region):9s}  {w1:.4f}  {w2:.4f}")

# below, at and above the exceptional point the transfer energy oscillates,
# grows as t^2 and grows exponentially
print("\nt      E(g=0.3)   E(g=0.5)   k^2 t^2    E(g=0.7)")
cfg = IntegrationConfig(t_end=20.0, record_stride=2.5)
runs = {g: integrate(pt_linear(kappa, g), cfg=cfg) for g in (0.3, 0.5, 0.7)}
for i, t in enumerate(runs[0.3].t):
    print(f"{t:5.1f}  {runs[0.3].e[i]:9.4f}  {runs[0.5].e[i]:9.4f}  {kappa**2 * t**2:9.4f}  "
          f"{runs[0.7].e[i]:10.4g}")

sol = LinearSolution(kappa, 0.3)
t = runs[0.3].t
print("\nmax |E_num - E_exact| at gamma=0.3:",
      f"{np.max(np.abs(runs[0.3].e - transfer_energy_closed_form(sol, t))):.2e}")
