"""Eigenfrequencies, saturated gain and exceptional-point location."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .core import (
    DEFAULT_EP_TOL,
    LinearGain,
    SaturableGain,
    SpectralRegion,
    SystemParams,
    classify_region,
)

__all__ = [
    "EigenSet",
    "UnsupportedConfiguration",
    "NoCrossing",
    "linear_eigenfrequencies",
    "nonlinear_eigenfrequencies",
    "saturated_gain",
    "characteristic_residual",
    "exceptional_arc",
]


class UnsupportedConfiguration(ValueError):
    pass


class NoCrossing(ValueError):
    pass


@dataclass(frozen=True)
class EigenSet:
    """Complex eigenfrequencies of the dimer.

    ``mode_gains[i]`` is the gain value at which ``frequencies[i]`` solves the
    characteristic equation; for the linear dimer every entry equals gamma.
    """

    frequencies: tuple
    region: SpectralRegion
    mode_gains: tuple
    g_sat: Optional[float] = None


def _check_resonant(params: SystemParams):
    if params.omega_a != params.omega_b:
        raise UnsupportedConfiguration("closed-form spectrum needs omega_a == omega_b")


def linear_eigenfrequencies(params: SystemParams, tol: float = DEFAULT_EP_TOL) -> EigenSet:
    """omega0 +/- sqrt(kappa^2 - gamma^2) for the balanced dimer g = gamma."""
    _check_resonant(params)
    if not isinstance(params.gain, LinearGain) or params.gain.g != params.gamma:
        raise UnsupportedConfiguration("linear spectrum needs LinearGain with g == gamma")
    w0, k, g = params.omega_a, params.kappa, params.gamma
    region = classify_region(k, g, tol)
    if region is SpectralRegion.EXCEPTIONAL_POINT:
        split = 0j
    elif region is SpectralRegion.UNBROKEN:
        split = complex(math.sqrt(k * k - g * g), 0.0)
    else:
        split = complex(0.0, math.sqrt(g * g - k * k))
    freqs = (complex(w0) + split, complex(w0) - split)
    return EigenSet(freqs, region, (g, g))


def saturated_gain(kappa: float, gamma: float) -> float:
    """gamma below the exceptional point, kappa^2/gamma above it."""
    if gamma < kappa or gamma == 0:
        return gamma
    return kappa * kappa / gamma


def nonlinear_eigenfrequencies(params: SystemParams, tol: float = DEFAULT_EP_TOL) -> EigenSet:
    _check_resonant(params)
    if not isinstance(params.gain, SaturableGain):
        raise UnsupportedConfiguration("nonlinear spectrum needs a SaturableGain model")
    w0, k, g = params.omega_a, params.kappa, params.gamma
    region = classify_region(k, g, tol)
    if g == 0 or not math.isfinite(k * k / g):
        # lossless: the omega0 mode would need unbounded gain kappa^2/gamma
        freqs = (complex(w0 + k), complex(w0 - k))
        return EigenSet(freqs, region, (0.0, 0.0), 0.0)
    if g < k and region is SpectralRegion.UNBROKEN:
        # the omega0 mode only closes the characteristic equation with g = kappa^2/gamma
        split = math.sqrt(k * k - g * g)
        freqs = (complex(w0), complex(w0 + split), complex(w0 - split))
        return EigenSet(freqs, region, (k * k / g, g, g), g)
    g_sat = k * k / g
    freqs = (complex(w0), complex(w0, g_sat - g))
    return EigenSet(freqs, region, (g_sat, g_sat), g_sat)


def characteristic_residual(omega: complex, g: float, gamma: float, kappa: float,
                            omega0: float = 1.0) -> float:
    """|(omega0 + i g - omega)(omega0 - i gamma - omega) - kappa^2|"""
    return abs((omega0 + 1j * g - omega) * (omega0 - 1j * gamma - omega) - kappa * kappa)


def exceptional_arc(coupling_curve: Callable[[float], float], gamma: float,
                    d_range: Sequence[float], tol: float = 1e-10,
                    max_iter: int = 200) -> float:
    """Distance where a decreasing coupling curve crosses ``gamma`` (bisection)."""
    lo, hi = float(d_range[0]), float(d_range[1])
    k_lo, k_hi = coupling_curve(lo), coupling_curve(hi)
    if not (k_hi <= gamma <= k_lo):
        raise NoCrossing(
            f"gamma={gamma} outside attainable coupling range [{k_hi}, {k_lo}]")
    target = tol * max(abs(gamma), 1e-300)
    if abs(k_lo - gamma) <= target:
        return lo
    if abs(k_hi - gamma) <= target:
        return hi
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        k_mid = coupling_curve(mid)
        if abs(k_mid - gamma) <= target or hi - lo <= 4 * math.ulp(mid):
            break
        if k_mid > gamma:
            lo = mid
        else:
            hi = mid
    return mid
