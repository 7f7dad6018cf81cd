"""Time integration of the coupled-mode equations and steady-state analysis.

The integrator is an embedded Dormand-Prince 5(4) pair with PI step-size
control and its fourth-order continuous extension, which is used to place
samples on a uniform recording grid without constraining the step size.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import AmplitudeState, LinearGain, SaturableGain, SystemParams

__all__ = [
    "IntegrationConfig",
    "Trajectory",
    "TRAJECTORY_HEADER",
    "SteadyStateReport",
    "KappaSchedule",
    "IntegrationError",
    "IntegrationFailure",
    "DivergenceError",
    "MeasurementUnavailable",
    "integrate",
    "detect_steady_state",
    "measure_mode_frequency",
]

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6] + (0.0,)
# fifth-order minus embedded fourth-order weights
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# continuous extension: y(t0 + s h) = y0 + h * sum_j K_j * (P[j] . (s, s^2, s^3, s^4))
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 10.0
_BETA = 0.04  # PI stabilisation exponent
_ALPHA = 0.2 - 0.75 * _BETA


class IntegrationError(RuntimeError):
    """Integration stopped early; ``partial`` holds the samples produced so far."""

    def __init__(self, message: str, partial: Optional["Trajectory"] = None):
        super().__init__(message)
        self.partial = partial


class IntegrationFailure(IntegrationError):
    pass


class DivergenceError(IntegrationError):
    pass


class MeasurementUnavailable(ValueError):
    pass


@dataclass(frozen=True)
class IntegrationConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    t_end: float = 200.0
    max_step: float = 1.0
    record_stride: float = 0.01
    overflow_guard: float = 1e150

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "t_end", "max_step", "record_stride", "overflow_guard"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def replace(self, **changes) -> "IntegrationConfig":
        return IntegrationConfig(**{**self.__dict__, **changes})


TRAJECTORY_HEADER = ["t", "re_psi_a", "im_psi_a", "re_psi_b", "im_psi_b", "g", "e", "e_a", "p"]

KappaSchedule = Sequence[tuple]  # ((t_start, kappa), ...) with t_start[0] == 0


@dataclass
class Trajectory:
    t: np.ndarray
    psi_a: np.ndarray
    psi_b: np.ndarray
    g: np.ndarray
    kappa: np.ndarray
    omega_a: float = 1.0
    omega_b: float = 1.0
    e: np.ndarray = field(init=False)
    e_a: np.ndarray = field(init=False)
    p: np.ndarray = field(init=False)

    def __post_init__(self):
        self.e = self.omega_b * np.abs(self.psi_b) ** 2
        self.e_a = self.omega_a * np.abs(self.psi_a) ** 2
        p = np.empty_like(self.e)
        pos = self.t > 0
        p[pos] = self.e[pos] / self.t[pos]
        p[~pos] = np.where(self.e[~pos] == 0, 0.0, np.nan)
        self.p = p

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> AmplitudeState:
        return AmplitudeState(self.psi_a[i], self.psi_b[i], self.t[i])

    @property
    def norm(self) -> np.ndarray:
        return np.abs(self.psi_a) ** 2 + np.abs(self.psi_b) ** 2

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        cols = (self.t, self.psi_a.real, self.psi_a.imag, self.psi_b.real, self.psi_b.imag,
                self.g, self.e, self.e_a, self.p)
        for row in zip(*cols):
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, kappa: float = math.nan, omega_a: float = 1.0,
                 omega_b: float = 1.0) -> "Trajectory":
        """Rebuild from CSV; the coupling is not stored there and is filled with ``kappa``."""
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != TRAJECTORY_HEADER:
            raise ValueError(f"expected header {','.join(TRAJECTORY_HEADER)}")
        data = np.array([[float(x) for x in r] for r in rows[1:] if r]).reshape(-1, 9).T
        t, ra, ia, rb, ib, g = data[:6]
        return cls(t, ra + 1j * ia, rb + 1j * ib, g, np.full_like(t, kappa), omega_a, omega_b)

    def between(self, t0: float, t1: float) -> "Trajectory":
        """Samples with t0 <= t < t1 (t1 inclusive when it is the last sample)."""
        mask = (self.t >= t0) & ((self.t < t1) | (self.t == self.t[-1]) & (t1 >= self.t[-1]))
        return Trajectory(self.t[mask], self.psi_a[mask], self.psi_b[mask], self.g[mask],
                          self.kappa[mask], self.omega_a, self.omega_b)


@dataclass(frozen=True)
class SteadyStateReport:
    converged: bool
    t_settle: float
    e_steady: float
    g_measured: float
    mode_frequency: float


def _gain_fn(gain):
    if isinstance(gain, LinearGain):
        g = float(gain.g)
        return lambda amp2: g
    if isinstance(gain, SaturableGain):
        num = 2.0 * (gain.g1 + gain.gamma1)
        g1 = gain.gamma1
        return lambda amp2: num / (1.0 + amp2) - g1
    raise TypeError(f"unsupported gain model {gain!r}")


def _normalise_schedule(schedule, kappa, t_end):
    if not schedule:
        return [(0.0, float(kappa))]
    segs = [(float(t0), float(k)) for t0, k in schedule]
    if segs[0][0] != 0.0:
        raise ValueError("schedule must start at t=0")
    for (ta, _), (tb, _) in zip(segs, segs[1:]):
        if not tb > ta:
            raise ValueError("schedule times must be strictly increasing")
    for _, k in segs:
        if not k >= 0:
            raise ValueError("scheduled kappa must be non-negative")
    return [s for s in segs if s[0] < t_end] or segs[:1]


def _initial_step(f, t, y, f0, rtol, atol, max_step):
    sc = [atol + rtol * abs(v) for v in y]
    d0 = math.sqrt(sum((abs(v) / s) ** 2 for v, s in zip(y, sc)) / 2)
    d1 = math.sqrt(sum((abs(v) / s) ** 2 for v, s in zip(f0, sc)) / 2)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = [v + h0 * dv for v, dv in zip(y, f0)]
    f1 = f(y1)
    d2 = math.sqrt(sum((abs(a - b) / s) ** 2 for a, b, s in zip(f1, f0, sc)) / 2) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step)


def integrate(params: SystemParams, initial: Optional[AmplitudeState] = None,
              cfg: Optional[IntegrationConfig] = None,
              schedule: Optional[KappaSchedule] = None) -> Trajectory:
    """Integrate the dimer from ``initial`` to ``cfg.t_end``.

    dpsi_A/dt = (-i omega_A + g(|psi_A|)) psi_A - i kappa psi_B
    dpsi_B/dt = (-i omega_B - gamma) psi_B - i kappa psi_A

    ``schedule`` overrides ``params.kappa`` with a piecewise-constant
    coupling; steps never straddle a switching time and the state is carried
    across each switch unchanged.

    Raises
    ------
    DivergenceError
        an amplitude exceeded ``cfg.overflow_guard``.
    IntegrationFailure
        the step size underflowed.
    """
    initial = initial or AmplitudeState()
    cfg = cfg or IntegrationConfig()
    if initial.t != 0.0:
        raise ValueError("integration starts from t=0")
    gain = _gain_fn(params.gain)
    wa, wb, gamma = params.omega_a, params.omega_b, params.gamma
    rtol, atol, guard = cfg.rel_tol, cfg.abs_tol, cfg.overflow_guard
    segments = _normalise_schedule(schedule, params.kappa, cfg.t_end)

    # per-step records for the dense-output pass
    starts, widths, y0s, ks, kappas = [], [], [], [], []

    def finish():
        return _resample(cfg, params, starts, widths, y0s, ks, kappas, segments)

    a, b = initial.psi_a, initial.psi_b
    t = 0.0
    h = None
    fac_old = 1e-4
    for si, (seg_start, kappa) in enumerate(segments):
        seg_end = segments[si + 1][0] if si + 1 < len(segments) else cfg.t_end
        seg_end = min(seg_end, cfg.t_end)
        mik = -1j * kappa
        ca, cb_ = -1j * wa, -1j * wb - gamma

        def f(y):
            ya, yb = y
            return ((ca + gain(ya.real * ya.real + ya.imag * ya.imag)) * ya + mik * yb,
                    cb_ * yb + mik * ya)

        k1 = f((a, b))
        if h is None:
            h = _initial_step(f, t, (a, b), k1, rtol, atol, cfg.max_step)
        last = False
        while not last:
            h = min(h, cfg.max_step)
            h_min = 16 * math.ulp(max(abs(t), 1.0))
            if h < h_min:
                raise IntegrationFailure(f"step size underflow at t={t}", finish())
            if t + h >= seg_end - h_min:
                h = seg_end - t
                last = True
            # stages
            a1, b1 = k1
            ta = _A[1]
            k2 = f((a + h * ta[0] * a1, b + h * ta[0] * b1))
            ta = _A[2]
            k3 = f((a + h * (ta[0] * a1 + ta[1] * k2[0]),
                    b + h * (ta[0] * b1 + ta[1] * k2[1])))
            ta = _A[3]
            k4 = f((a + h * (ta[0] * a1 + ta[1] * k2[0] + ta[2] * k3[0]),
                    b + h * (ta[0] * b1 + ta[1] * k2[1] + ta[2] * k3[1])))
            ta = _A[4]
            k5 = f((a + h * (ta[0] * a1 + ta[1] * k2[0] + ta[2] * k3[0] + ta[3] * k4[0]),
                    b + h * (ta[0] * b1 + ta[1] * k2[1] + ta[2] * k3[1] + ta[3] * k4[1])))
            ta = _A[5]
            k6 = f((a + h * (ta[0] * a1 + ta[1] * k2[0] + ta[2] * k3[0] + ta[3] * k4[0]
                             + ta[4] * k5[0]),
                    b + h * (ta[0] * b1 + ta[1] * k2[1] + ta[2] * k3[1] + ta[3] * k4[1]
                             + ta[4] * k5[1])))
            ta = _A[6]
            a_new = a + h * (ta[0] * a1 + ta[2] * k3[0] + ta[3] * k4[0] + ta[4] * k5[0]
                             + ta[5] * k6[0])
            b_new = b + h * (ta[0] * b1 + ta[2] * k3[1] + ta[3] * k4[1] + ta[4] * k5[1]
                             + ta[5] * k6[1])
            k7 = f((a_new, b_new))
            e = _E
            err_a = h * (e[0] * a1 + e[2] * k3[0] + e[3] * k4[0] + e[4] * k5[0]
                         + e[5] * k6[0] + e[6] * k7[0])
            err_b = h * (e[0] * b1 + e[2] * k3[1] + e[3] * k4[1] + e[4] * k5[1]
                         + e[5] * k6[1] + e[6] * k7[1])
            sa = atol + rtol * max(abs(a), abs(a_new))
            sb = atol + rtol * max(abs(b), abs(b_new))
            err = math.sqrt(0.5 * ((abs(err_a) / sa) ** 2 + (abs(err_b) / sb) ** 2))

            if not math.isfinite(err):
                h *= _FAC_MIN
                last = False
                continue
            fac11 = err ** _ALPHA
            if err <= 1.0:
                fac = fac11 / fac_old ** _BETA / _SAFETY
                fac = min(1 / _FAC_MIN, max(1 / _FAC_MAX, fac))
                fac_old = max(err, 1e-4)
                starts.append(t)
                widths.append(h)
                y0s.append((a, b))
                ks.append((k1, k2, k3, k4, k5, k6, k7))
                kappas.append(kappa)
                t = seg_end if last else t + h
                a, b = a_new, b_new
                k1 = k7
                if abs(a) > guard or abs(b) > guard:
                    raise DivergenceError(f"amplitude exceeded {guard:g} at t={t}", finish())
                h = h / fac
            else:
                h = h / min(1 / _FAC_MIN, fac11 / _SAFETY)
                last = False
    return finish()


def _sample_times(cfg: IntegrationConfig) -> np.ndarray:
    n = int(math.floor(cfg.t_end / cfg.record_stride + 1e-9))
    ts = np.arange(n + 1) * cfg.record_stride
    if cfg.t_end - ts[-1] > 1e-9 * cfg.record_stride:
        ts = np.append(ts, cfg.t_end)
    return ts


def _resample(cfg, params, starts, widths, y0s, ks, kappas, segments) -> Trajectory:
    ts = _sample_times(cfg)
    gain = _gain_fn(params.gain)
    if not starts:
        a0 = np.array([0j])
        return Trajectory(ts[:0], a0[:0], a0[:0], ts[:0], ts[:0], params.omega_a, params.omega_b)
    starts_a = np.asarray(starts)
    widths_a = np.asarray(widths)
    reached = starts_a[-1] + widths_a[-1]
    ts = ts[ts <= reached * (1 + 1e-15)]
    idx = np.clip(np.searchsorted(starts_a, ts, side="right") - 1, 0, len(starts_a) - 1)
    h = widths_a[idx]
    s = (ts - starts_a[idx]) / h
    powers = np.stack([s, s * s, s ** 3, s ** 4], axis=-1)  # (n, 4)
    K = np.asarray(ks, dtype=complex)  # (nsteps, 7, 2)
    Q = np.einsum("mkc,kj->mcj", K, _P)  # (nsteps, 2, 4)
    y0 = np.asarray(y0s, dtype=complex)
    y = y0[idx] + h[:, None] * np.einsum("ncj,nj->nc", Q[idx], powers)
    psi_a, psi_b = y[:, 0], y[:, 1]
    amp2 = psi_a.real ** 2 + psi_a.imag ** 2
    g = np.array([gain(x) for x in amp2]) if isinstance(params.gain, SaturableGain) \
        else np.full(len(ts), float(params.gain.g))
    kap = np.asarray(kappas)[idx]
    return Trajectory(ts, psi_a, psi_b, g, kap, params.omega_a, params.omega_b)


def _tail_spread(x: np.ndarray):
    """Relative spread (max - min)/mean of x[i:] for every i."""
    rev = x[::-1]
    mx = np.maximum.accumulate(rev)[::-1]
    mn = np.minimum.accumulate(rev)[::-1]
    mean = (np.cumsum(rev) / np.arange(1, len(x) + 1))[::-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(mean > 0, (mx - mn) / mean, np.inf)


def _steady_spread(x: np.ndarray) -> float:
    mean = x.mean()
    return (x.max() - x.min()) / mean if mean > 0 else math.inf


def measure_mode_frequency(traj: Trajectory, window: float = 20.0,
                           threshold: float = 1e-3) -> float:
    """Oscillation frequency of psi_B from a phase fit over the trailing window.

    Amplitudes evolve as exp(-i omega t), so the frequency is minus the slope
    of the unwrapped phase.
    """
    seg = traj.between(traj.t[-1] - window, math.inf)
    if len(seg) < 3:
        raise MeasurementUnavailable("window holds fewer than three samples")
    amp2 = np.abs(seg.psi_b) ** 2
    if not _steady_spread(amp2) < threshold:
        raise MeasurementUnavailable("psi_B is not a single steady mode over the window")
    phase = np.unwrap(np.angle(seg.psi_b))
    slope = np.polyfit(seg.t - seg.t[0], phase, 1)[0]
    return float(-slope)


def detect_steady_state(traj: Trajectory, window: float = 20.0,
                        threshold: float = 1e-3) -> SteadyStateReport:
    """Check whether |psi_B|^2 has settled over the trailing ``window``.

    ``t_settle`` is the earliest sample time from which the relative spread of
    |psi_B|^2 up to the end of the trajectory stays below ``threshold``.
    """
    if len(traj) < 2 or traj.t[-1] - traj.t[0] < 2 * window:
        raise ValueError("trajectory must be longer than twice the window")
    amp2 = np.abs(traj.psi_b) ** 2
    tail = traj.t >= traj.t[-1] - window
    e_steady = float(np.mean(traj.e[tail]))
    g_measured = float(np.mean(traj.g[tail]))
    if not np.all(np.isfinite(amp2[tail])) or not _steady_spread(amp2[tail]) < threshold:
        return SteadyStateReport(False, math.nan, e_steady, g_measured, math.nan)
    spread = _tail_spread(amp2)
    bad = np.nonzero(~(spread < threshold))[0]
    t_settle = float(traj.t[bad[-1] + 1]) if len(bad) else float(traj.t[0])
    try:
        freq = measure_mode_frequency(traj, window, threshold)
    except MeasurementUnavailable:
        freq = math.nan
    return SteadyStateReport(True, t_settle, e_steady, g_measured, freq)
