"""Domain types and observables for the two-resonator gain/loss dimer.

All rates and frequencies are dimensionless, measured in units of the
resonant frequency omega0 (which is 1 unless stated otherwise).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

__all__ = [
    "AmplitudeState",
    "LinearGain",
    "SaturableGain",
    "GainModel",
    "SystemParams",
    "SpectralRegion",
    "DEFAULT_EP_TOL",
    "eval_gain",
    "classify_region",
    "transfer_energy",
    "storage_energy",
    "average_power",
    "pt_linear",
    "pt_saturable",
]

DEFAULT_EP_TOL = 1e-9


@dataclass(frozen=True)
class AmplitudeState:
    """Field amplitudes of the battery (A) and consumption hub (B) at time ``t``."""

    psi_a: complex = 1.0 + 0.0j
    psi_b: complex = 0.0 + 0.0j
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "psi_a", complex(self.psi_a))
        object.__setattr__(self, "psi_b", complex(self.psi_b))
        object.__setattr__(self, "t", float(self.t))

    def is_finite(self) -> bool:
        return all(
            math.isfinite(x)
            for x in (self.psi_a.real, self.psi_a.imag, self.psi_b.real, self.psi_b.imag, self.t)
        )


@dataclass(frozen=True)
class LinearGain:
    """Amplitude-independent gain rate ``g``."""

    g: float


@dataclass(frozen=True)
class SaturableGain:
    """Lorentzian saturable gain 2(g1 + gamma1)/(1 + |psi_A|^2) - gamma1."""

    g1: float
    gamma1: float

    def __post_init__(self):
        if not self.g1 > 0:
            raise ValueError(f"g1 must be positive, got {self.g1}")
        if not self.gamma1 >= 0:
            raise ValueError(f"gamma1 must be non-negative, got {self.gamma1}")

    @property
    def small_signal(self) -> float:
        return 2.0 * self.g1 + self.gamma1

    def intensity_at(self, g: float) -> float:
        """|psi_A|^2 at which the gain equals ``g`` (inverse of the gain law)."""
        return 2.0 * (self.g1 + self.gamma1) / (g + self.gamma1) - 1.0


GainModel = Union[LinearGain, SaturableGain]


@dataclass(frozen=True)
class SystemParams:
    omega_a: float = 1.0
    omega_b: float = 1.0
    kappa: float = 0.5
    gamma: float = 0.3
    gain: GainModel = field(default_factory=lambda: LinearGain(0.3))

    def __post_init__(self):
        if not (self.omega_a > 0 and self.omega_b > 0):
            raise ValueError("resonator frequencies must be positive")
        if not self.kappa >= 0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if not isinstance(self.gain, (LinearGain, SaturableGain)):
            raise TypeError(f"unsupported gain model {self.gain!r}")

    @property
    def is_resonant(self) -> bool:
        return self.omega_a == self.omega_b

    def with_kappa(self, kappa: float) -> "SystemParams":
        return SystemParams(self.omega_a, self.omega_b, kappa, self.gamma, self.gain)


def pt_linear(kappa: float, gamma: float, omega0: float = 1.0) -> SystemParams:
    """Balanced gain/loss dimer, g = gamma."""
    return SystemParams(omega0, omega0, kappa, gamma, LinearGain(gamma))


def pt_saturable(kappa: float, gamma: float, g1: float = 3.0, gamma1: float = 0.05,
                 omega0: float = 1.0) -> SystemParams:
    return SystemParams(omega0, omega0, kappa, gamma, SaturableGain(g1, gamma1))


class SpectralRegion(enum.Enum):
    UNBROKEN = "unbroken"
    EXCEPTIONAL_POINT = "ep"
    BROKEN = "broken"

    def __str__(self):
        return self.value


def eval_gain(gain: GainModel, psi_a_abs: float) -> float:
    """Instantaneous gain rate for a given battery amplitude ``|psi_A|``."""
    if isinstance(gain, LinearGain):
        return gain.g
    return 2.0 * (gain.g1 + gain.gamma1) / (1.0 + psi_a_abs * psi_a_abs) - gain.gamma1


def classify_region(kappa: float, gamma: float, tol: float = DEFAULT_EP_TOL) -> SpectralRegion:
    if not tol > 0:
        raise ValueError("tol must be positive")
    k, g = abs(kappa), abs(gamma)
    if abs(g - k) <= tol * max(g, k, 1.0):
        return SpectralRegion.EXCEPTIONAL_POINT
    return SpectralRegion.UNBROKEN if g < k else SpectralRegion.BROKEN


def transfer_energy(state: AmplitudeState, omega_b: float = 1.0) -> float:
    """Energy held by the consumption hub, omega_B |psi_B|^2."""
    return omega_b * abs(state.psi_b) ** 2


def storage_energy(state: AmplitudeState, omega_a: float = 1.0) -> float:
    return omega_a * abs(state.psi_a) ** 2


def average_power(energy: float, t: float) -> float:
    if not t > 0:
        raise ValueError(f"average power undefined for t={t} <= 0")
    return energy / t
