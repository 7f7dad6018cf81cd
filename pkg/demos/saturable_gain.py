"""Saturable gain: the steady state locks to the loss and ignores the distance.

Run with ``python3 demos/saturable_gain.py`` (about 20 s).
"""
import numpy as np

from nhbattery import (
    IntegrationConfig,
    SaturableGain,
    SweepGrid,
    detect_steady_state,
    integrate,
    pt_saturable,
    run_sweep,
    saturated_gain,
)

kappa = 0.5
print("gamma   g_sat(theory)   g measured   E_s")
for gamma in (0.1, 0.3, 0.4, 0.6, 0.9):
    rep = detect_steady_state(integrate(pt_saturable(kappa, gamma), cfg=IntegrationConfig(t_end=200.0)))
    print(f"{gamma:5.2f}   {saturated_gain(kappa, gamma):13.6f}   {rep.g_measured:10.6f}   "
          f"{rep.e_steady:.4f}")

# distance scan with the default coil pair at a small loss
grid = SweepGrid(np.linspace(0.2, 0.6, 9), (0.04,), SaturableGain(3.0, 0.05))
res = run_sweep(grid, cfg=IntegrationConfig(t_end=3000.0, record_stride=0.05))
print("\nd [m]   kappa      region     E_s")
for i, d in enumerate(grid.d_values):
    print(f"{d:5.2f}   {res.kappas[i]:.5f}   {str(res.region_mask[i, 0]):9s}  {res.e_s[i, 0]:.4f}")
