"""Sudden distance changes while charging: each segment re-settles to the same energy.

Run with ``python3 demos/distance_steps.py``.
"""
from nhbattery import IntegrationConfig, SaturableGain, StepSchedule, SystemParams, run_step_response
from nhbattery.coupling import DEFAULT_COIL

schedule = StepSchedule(((0.0, 0.2), (600.0, 0.26), (900.0, 0.22), (1200.0, 0.28), (1500.0, 0.2)))
params = SystemParams(1.0, 1.0, 0.0, 0.04, SaturableGain(3.0, 0.05))
res = run_step_response(schedule, DEFAULT_COIL, params,
                        IntegrationConfig(t_end=1800.0, record_stride=0.05))
print("t_start   d [m]   settled   settle time   E_s")
for (t0, d), rep, ts in zip(schedule.segments, res.reports, res.settle_times()):
    print(f"{t0:7.0f}   {d:5.2f}   {str(rep.converged):7s}   {ts:11.1f}   {rep.e_steady:.5f}")
