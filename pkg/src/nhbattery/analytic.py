"""Closed-form dynamics of the balanced (g = gamma) dimer.

Every expression assumes the battery starts full and the hub empty,
psi_A(0) = 1 and psi_B(0) = 0.  Writing Omega^2 = kappa^2 - gamma^2, both
amplitudes follow from a single shape function

    S(t) = sin(Omega t)/Omega   (continued to t at Omega = 0 and sinh above it)

through psi_B = -i kappa exp(-i omega0 t) S(t) and
psi_A = exp(-i omega0 t) (S'(t) + gamma S(t)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .core import DEFAULT_EP_TOL, SpectralRegion, classify_region

__all__ = [
    "LinearSolution",
    "SERIES_CUTOFF",
    "psi_a_closed_form",
    "psi_b_closed_form",
    "transfer_energy_closed_form",
    "storage_energy_closed_form",
    "power_closed_form",
    "max_transfer_energy",
    "max_power",
]

# below this |Omega| the trig/hyperbolic quotients are replaced by their series
SERIES_CUTOFF = 1e-6


@dataclass(frozen=True)
class LinearSolution:
    kappa: float
    gamma: float
    omega0: float = 1.0
    tol: float = DEFAULT_EP_TOL
    region: SpectralRegion = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "region", classify_region(self.kappa, self.gamma, self.tol))

    @property
    def detuning_sq(self) -> float:
        """kappa^2 - gamma^2 (positive when unbroken)."""
        return self.kappa * self.kappa - self.gamma * self.gamma

    def shape(self, t):
        """S(t) and its derivative S'(t)."""
        t = np.asarray(t, dtype=float)
        if self.region is SpectralRegion.EXCEPTIONAL_POINT:
            return t.copy(), np.ones_like(t)
        s = self.detuning_sq
        rate = math.sqrt(abs(s))
        if rate < SERIES_CUTOFF:
            x = -s * t * t
            # truncated at x^3: exact to rounding while |x| << 1
            S = t * (1 + x / 6 + x * x / 120 + x ** 3 / 5040)
            dS = 1 + x / 2 + x * x / 24 + x ** 3 / 720
            return S, dS
        if s > 0:
            return np.sin(rate * t) / rate, np.cos(rate * t)
        return np.sinh(rate * t) / rate, np.cosh(rate * t)


def psi_b_closed_form(sol: LinearSolution, t):
    S, _ = sol.shape(t)
    out = -1j * sol.kappa * np.exp(-1j * sol.omega0 * np.asarray(t, float)) * S
    return out if np.ndim(out) else complex(out)


def psi_a_closed_form(sol: LinearSolution, t):
    S, dS = sol.shape(t)
    out = np.exp(-1j * sol.omega0 * np.asarray(t, float)) * (dS + sol.gamma * S)
    return out if np.ndim(out) else complex(out)


def _scalar(x):
    return x if np.ndim(x) else float(x)


def transfer_energy_closed_form(sol: LinearSolution, t):
    """omega0 kappa^2 S(t)^2, i.e. the three-branch energy law."""
    S, _ = sol.shape(t)
    return _scalar(sol.omega0 * sol.kappa ** 2 * S * S)


def storage_energy_closed_form(sol: LinearSolution, t):
    S, dS = sol.shape(t)
    return _scalar(sol.omega0 * (dS + sol.gamma * S) ** 2)


def power_closed_form(sol: LinearSolution, t):
    """E(t)/t, continued by its limit 0 at t = 0."""
    t = np.asarray(t, dtype=float)
    S, _ = sol.shape(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(t > 0, sol.omega0 * sol.kappa ** 2 * S * S / np.where(t > 0, t, 1.0), 0.0)
    return _scalar(p)


@lru_cache(maxsize=None)
def _power_peak_phase() -> float:
    """Root of tan(x) = 2x on (0, pi/2): where sin^2(x)/x peaks."""
    return brentq(lambda x: math.sin(x) * math.cos(x) * 2 * x - math.sin(x) ** 2, 0.5, 1.5,
                  xtol=1e-15, rtol=4 * np.finfo(float).eps)


def max_transfer_energy(sol: LinearSolution, t_end: float) -> float:
    """max of E over [0, t_end]."""
    if sol.region is SpectralRegion.UNBROKEN:
        rate = math.sqrt(sol.detuning_sq)
        if rate * t_end >= math.pi / 2:
            return sol.omega0 * sol.kappa ** 2 / sol.detuning_sq
    # monotone on [0, t_end] in every other case
    return transfer_energy_closed_form(sol, t_end)


def max_power(sol: LinearSolution, t_end: float) -> float:
    """max of E(t)/t over (0, t_end]."""
    if sol.region is SpectralRegion.UNBROKEN and sol.detuning_sq > SERIES_CUTOFF ** 2:
        rate = math.sqrt(sol.detuning_sq)
        x = _power_peak_phase()
        if rate * t_end >= x:
            return sol.omega0 * sol.kappa ** 2 * math.sin(x) ** 2 / (rate * x)
    return power_closed_form(sol, t_end)
