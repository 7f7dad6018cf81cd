"""Transient LC-tank pair against its coupled-mode reduction.

Run with ``python3 demos/circuit_check.py``.  The linear presets show how the
envelope error against the reduced model shrinks as the coupling is weakened.
"""
import json
import math

from nhbattery import CircuitParams, crossvalidate, map_to_coupled_mode
from nhbattery.config import circuit_from, load_preset

for name in ("fig7-unbroken", "fig7-broken", "fig8-saturating"):
    recipe = circuit_from(load_preset(name))
    report = crossvalidate(recipe.params, recipe.t_end, recipe.initial)
    print(name, "passed" if report["passed"] else "outside budget")
    print(json.dumps(report["metrics"], indent=2, sort_keys=True, default=str))

print("\nM/L     kappa     beat error")
for ml in (0.2, 0.1, 0.05):
    cp = CircuitParams(m_over_l=ml, r_b=3e3 * 0.2 / ml)
    sp = map_to_coupled_mode(cp)
    beat = math.sqrt(sp.kappa ** 2 - sp.gamma ** 2)
    w0 = 1 / math.sqrt(cp.l * cp.c)
    rep = crossvalidate(cp, t_end=3.5 * math.pi / (beat * w0))
    print(f"{ml:5.3f}   {sp.kappa:.4f}    {rep['metrics']['beat']['rel_error']:.3%}")
