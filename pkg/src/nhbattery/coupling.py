"""Distance-dependent coupling of two coaxial coils.

Each coil is a stack of circular turns.  Turn-to-turn mutual inductance uses
Maxwell's closed form with complete elliptic integrals evaluated by the
arithmetic-geometric mean; the coupling rate follows from
kappa(d) = (omega0/2) M(d)/L.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "MU0",
    "CoilGeometry",
    "CouplingCurve",
    "DEFAULT_COIL",
    "ellipke",
    "loop_mutual_inductance",
    "mutual_inductance",
    "self_inductance",
    "kappa_of_distance",
    "coupling_curve",
]

MU0 = 4e-7 * math.pi
_AGM_TOL = 1e-15
_CLAMP_TOL = 1e-12


def ellipke(m):
    """Complete elliptic integrals K(m) and E(m) of parameter m = k^2, 0 <= m < 1.

    Uses the AGM recursion a' = (a+b)/2, b' = sqrt(ab), c' = (a-b)/2 with
    K = pi/(2 a_inf) and E = K (1 - sum 2^(n-1) c_n^2), c_0^2 = m.
    """
    m = np.asarray(m, dtype=float)
    if np.any(m < 0) or np.any(m >= 1):
        raise ValueError("parameter m must lie in [0, 1)")
    a = np.ones_like(m)
    b = np.sqrt(1.0 - m)
    total = 0.5 * m
    weight = 0.5
    for _ in range(64):
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        weight *= 2.0
        total = total + weight * c * c
        if np.all(np.abs(c) <= _AGM_TOL * a):
            break
    K = np.pi / (2.0 * a)
    E = K * (1.0 - total)
    if K.ndim == 0:
        return float(K), float(E)
    return K, E


def loop_mutual_inductance(a, b, z):
    """Mutual inductance (H) of coaxial circular loops of radii a, b at axial offset z."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    z = np.asarray(z, dtype=float)
    m = 4.0 * a * b / ((a + b) ** 2 + z * z)
    if np.any(m >= 1.0):
        over = float(np.max(m)) - 1.0
        if over > _CLAMP_TOL or np.any((z == 0) & (a == b)):
            raise ValueError("coincident loops: mutual inductance is singular")
        m = np.minimum(m, 1.0 - _CLAMP_TOL)
    k = np.sqrt(m)
    K, E = ellipke(m)
    out = MU0 * np.sqrt(a * b) * ((2.0 / k - k) * K - (2.0 / k) * E)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class CoilGeometry:
    radius: float = 0.29
    turns: int = 3
    axial_pitch: float = 5e-3
    wire_radius: float = 2.5e-3

    def __post_init__(self):
        if not self.radius > self.wire_radius > 0:
            raise ValueError("need radius > wire_radius > 0")
        if int(self.turns) != self.turns or self.turns < 1:
            raise ValueError("turns must be a positive integer")
        if not self.axial_pitch >= 2 * self.wire_radius:
            raise ValueError("axial_pitch must be at least one wire diameter")

    def turn_offsets(self) -> np.ndarray:
        """Axial position of each turn relative to the coil centre."""
        n = int(self.turns)
        return (np.arange(n) - 0.5 * (n - 1)) * self.axial_pitch


DEFAULT_COIL = CoilGeometry()


def mutual_inductance(geom_a: CoilGeometry, geom_b: CoilGeometry, d: float) -> float:
    """Mutual inductance (H) of two coaxial coils whose centres are ``d`` metres apart."""
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    za = geom_a.turn_offsets()[:, None]
    zb = d + geom_b.turn_offsets()[None, :]
    return float(np.sum(loop_mutual_inductance(geom_a.radius, geom_b.radius, zb - za)))


def self_inductance(geom: CoilGeometry) -> float:
    """Single-loop self terms plus mutual terms between distinct turns of one coil."""
    a = geom.radius
    n = int(geom.turns)
    single = MU0 * a * (math.log(8.0 * a / geom.wire_radius) - 2.0)
    z = geom.turn_offsets()
    dz = np.abs(z[:, None] - z[None, :])[~np.eye(n, dtype=bool)]
    pairs = float(np.sum(loop_mutual_inductance(a, a, dz))) if dz.size else 0.0
    return n * single + pairs


def kappa_of_distance(geom: CoilGeometry, d: float, omega0: float = 1.0) -> float:
    return 0.5 * omega0 * mutual_inductance(geom, geom, d) / self_inductance(geom)


@dataclass(frozen=True)
class CouplingCurve:
    distances: tuple
    kappas: tuple
    omega0: float = 1.0

    def __post_init__(self):
        if len(self.distances) != len(self.kappas) or not self.distances:
            raise ValueError("distances and kappas must be nonempty and equally long")
        if any(k <= 0 for k in self.kappas):
            raise ValueError("coupling must be positive")
        if any(b <= a for a, b in zip(self.distances, self.distances[1:])):
            raise ValueError("distances must increase strictly")
        if any(kb >= ka for ka, kb in zip(self.kappas, self.kappas[1:])):
            raise ValueError("coupling must decrease strictly with distance")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d_m", "kappa_per_omega0"])
        for d, k in zip(self.distances, self.kappas):
            w.writerow([repr(float(d)), repr(float(k) / self.omega0)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, omega0: float = 1.0) -> "CouplingCurve":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["d_m", "kappa_per_omega0"]:
            raise ValueError("expected header d_m,kappa_per_omega0")
        ds = tuple(float(r[0]) for r in rows[1:] if r)
        ks = tuple(float(r[1]) * omega0 for r in rows[1:] if r)
        return cls(ds, ks, omega0)


def coupling_curve(geom: CoilGeometry, distances: Iterable[float],
                   omega0: float = 1.0) -> CouplingCurve:
    ds = tuple(float(d) for d in distances)
    L = self_inductance(geom)
    ks = tuple(0.5 * omega0 * mutual_inductance(geom, geom, d) / L for d in ds)
    return CouplingCurve(ds, ks, omega0)
