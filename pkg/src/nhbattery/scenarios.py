"""Distance/loss sweeps, distance-step transients and storage-energy runs."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .analytic import (
    LinearSolution,
    max_power,
    max_transfer_energy,
    storage_energy_closed_form,
    transfer_energy_closed_form,
)
from .core import (
    DEFAULT_EP_TOL,
    AmplitudeState,
    LinearGain,
    SaturableGain,
    SpectralRegion,
    SystemParams,
    classify_region,
)
from .coupling import DEFAULT_COIL, CoilGeometry, kappa_of_distance
from .dynamics import (
    IntegrationConfig,
    IntegrationError,
    SteadyStateReport,
    Trajectory,
    detect_steady_state,
    integrate,
)
from .spectral import NoCrossing, exceptional_arc

__all__ = [
    "SweepGrid",
    "SweepResult",
    "StepSchedule",
    "StepResponse",
    "StorageComparison",
    "run_sweep",
    "run_step_response",
    "run_storage_comparison",
    "default_grid",
    "fmt_float",
]

SWEEP_HEADER = ["d_m", "gamma", "region", "e_max", "e_s", "p_max"]
STEP_HEADER = ["t", "d_m", "kappa", "e", "e_a", "g", "p"]


def fmt_float(x) -> str:
    """Shortest string that parses back to the same double."""
    if x is None:
        return ""
    return repr(float(x))


def _parse_float(s: str):
    return None if s == "" else float(s)


@dataclass(frozen=True)
class SweepGrid:
    """Distances (m) by loss rates; ``gain_family`` None means the balanced linear dimer."""

    d_values: tuple
    gamma_values: tuple
    gain_family: Optional[SaturableGain] = None

    def __post_init__(self):
        object.__setattr__(self, "d_values", tuple(float(d) for d in self.d_values))
        object.__setattr__(self, "gamma_values", tuple(float(g) for g in self.gamma_values))
        for name in ("d_values", "gamma_values"):
            axis = getattr(self, name)
            if not axis:
                raise ValueError(f"{name} must be nonempty")
            if any(b < a for a, b in zip(axis, axis[1:])):
                raise ValueError(f"{name} must be sorted")
        if any(d <= 0 for d in self.d_values):
            raise ValueError("distances must be positive")
        if any(g < 0 for g in self.gamma_values):
            raise ValueError("loss rates must be non-negative")

    @property
    def is_linear(self) -> bool:
        return self.gain_family is None

    @property
    def shape(self):
        return len(self.d_values), len(self.gamma_values)


def default_grid(nonlinear: bool = True) -> SweepGrid:
    ds = np.linspace(0.2, 1.2, 61)
    if nonlinear:
        return SweepGrid(ds, np.linspace(0.12 / 61, 0.12, 61), SaturableGain(3.0, 0.05))
    return SweepGrid(ds, np.linspace(0.0, 1.0, 61))


@dataclass
class SweepResult:
    grid: SweepGrid
    kappas: np.ndarray
    e_max: np.ndarray
    p_max: np.ndarray
    region_mask: np.ndarray
    e_s: Optional[np.ndarray] = None
    arc: List[Tuple[float, float]] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)

    def rows(self):
        nd, ng = self.grid.shape
        for i in range(nd):
            for j in range(ng):
                yield (self.grid.d_values[i], self.grid.gamma_values[j], self.region_mask[i, j],
                       self.e_max[i, j], None if self.e_s is None else self.e_s[i, j],
                       self.p_max[i, j])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for d, g, region, e_max, e_s, p_max in self.rows():
            w.writerow([fmt_float(d), fmt_float(g), str(region), fmt_float(e_max),
                        fmt_float(e_s), fmt_float(p_max)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, gain_family: Optional[SaturableGain] = None) -> "SweepResult":
        """Rebuild the grid-shaped fields of a sweep from its CSV form.

        Coupling values, the arc and diagnostics are not part of the CSV.
        """
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != SWEEP_HEADER:
            raise ValueError(f"expected header {','.join(SWEEP_HEADER)}")
        body = [r for r in rows[1:] if r]
        ds = sorted({float(r[0]) for r in body})
        gs = sorted({float(r[1]) for r in body})
        nd, ng = len(ds), len(gs)
        if len(body) != nd * ng:
            raise ValueError("CSV does not describe a full grid")
        e_max = np.empty((nd, ng))
        p_max = np.empty((nd, ng))
        e_s = np.empty((nd, ng))
        region = np.empty((nd, ng), dtype=object)
        has_es = all(r[4] != "" for r in body)
        for r in body:
            i, j = ds.index(float(r[0])), gs.index(float(r[1]))
            region[i, j] = SpectralRegion(r[2])
            e_max[i, j] = float(r[3])
            e_s[i, j] = float(r[4]) if has_es else np.nan
            p_max[i, j] = float(r[5])
        grid = SweepGrid(ds, gs, gain_family)
        return cls(grid, np.full(nd, np.nan), e_max, p_max, region, e_s if has_es else None)


def _sweep_cell(kappa, gamma, gain_family, cfg, tol, window, threshold, omega0):
    """(region, e_max, e_s, p_max, note) for one grid point."""
    region = classify_region(kappa, gamma, tol)
    if gain_family is None:
        sol = LinearSolution(kappa, gamma, omega0, tol)
        return (region, max_transfer_energy(sol, cfg.t_end), None,
                max_power(sol, cfg.t_end), None)
    params = SystemParams(omega0, omega0, kappa, gamma, gain_family)
    try:
        traj = integrate(params, AmplitudeState(), cfg)
    except IntegrationError as exc:
        return region, math.nan, math.nan, math.nan, f"integration failed: {exc}"
    rep = detect_steady_state(traj, window, threshold)
    p_max = float(np.nanmax(traj.p[1:])) if len(traj) > 1 else math.nan
    note = None if rep.converged else "not converged"
    return region, float(np.max(traj.e)), rep.e_steady, p_max, note


def _cell_star(args):
    return _sweep_cell(*args)


def run_sweep(grid: SweepGrid, geom: CoilGeometry = DEFAULT_COIL,
              cfg: Optional[IntegrationConfig] = None, omega0: float = 1.0,
              tol: float = DEFAULT_EP_TOL, window: float = 20.0, threshold: float = 1e-3,
              workers: int = 1) -> SweepResult:
    """Tabulate E_max, P_max (and E_s for saturable gain) over distance and loss.

    Linear cells use the closed forms over [0, cfg.t_end]; saturable cells are
    integrated and passed through the steady-state detector.  Cells that fail
    to settle are kept and listed in ``diagnostics``.
    """
    if cfg is None:
        cfg = IntegrationConfig(t_end=20.0) if grid.is_linear else IntegrationConfig()
    kappas = np.array([kappa_of_distance(geom, d, omega0) for d in grid.d_values])
    jobs = [(float(k), g, grid.gain_family, cfg, tol, window, threshold, omega0)
            for k in kappas for g in grid.gamma_values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_cell_star, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        cells = [_sweep_cell(*job) for job in jobs]

    nd, ng = grid.shape
    e_max = np.empty((nd, ng))
    p_max = np.empty((nd, ng))
    e_s = None if grid.is_linear else np.empty((nd, ng))
    region = np.empty((nd, ng), dtype=object)
    diagnostics = []
    for n, (reg, emx, es, pmx, note) in enumerate(cells):
        i, j = divmod(n, ng)
        region[i, j], e_max[i, j], p_max[i, j] = reg, emx, pmx
        if e_s is not None:
            e_s[i, j] = es
        if note:
            diagnostics.append(f"d={grid.d_values[i]!r} gamma={grid.gamma_values[j]!r}: {note}")

    arc = []
    d_lo, d_hi = grid.d_values[0], grid.d_values[-1]
    if d_hi > d_lo:
        curve = lambda d: kappa_of_distance(geom, d, omega0)
        for g in grid.gamma_values:
            try:
                arc.append((g, exceptional_arc(curve, g, (d_lo, d_hi))))
            except NoCrossing:
                pass
    return SweepResult(grid, kappas, e_max, p_max, region, e_s, arc, diagnostics)


@dataclass(frozen=True)
class StepSchedule:
    """Piecewise-constant separation: ((t_start, d), ...), first segment at t=0."""

    segments: tuple

    def __post_init__(self):
        segs = tuple((float(t), float(d)) for t, d in self.segments)
        if not segs or segs[0][0] != 0.0:
            raise ValueError("first segment must start at t=0")
        if any(b[0] <= a[0] for a, b in zip(segs, segs[1:])):
            raise ValueError("segment start times must increase strictly")
        if any(d <= 0 for _, d in segs):
            raise ValueError("distances must be positive")
        object.__setattr__(self, "segments", segs)

    def bounds(self, t_end: float):
        starts = [t for t, _ in self.segments]
        return list(zip(starts, starts[1:] + [t_end]))


@dataclass
class StepResponse:
    trajectory: Trajectory
    distance: np.ndarray
    schedule: StepSchedule
    reports: List[SteadyStateReport]

    def settle_times(self) -> List[float]:
        """Time from each step to the detected settling point (nan if unsettled)."""
        return [r.t_settle - t0 if r.converged else math.nan
                for r, (t0, _) in zip(self.reports, self.schedule.segments)]

    def to_csv(self) -> str:
        tr = self.trajectory
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(STEP_HEADER)
        for i in range(len(tr)):
            w.writerow([fmt_float(x) for x in (tr.t[i], self.distance[i], tr.kappa[i],
                                                tr.e[i], tr.e_a[i], tr.g[i], tr.p[i])])
        return buf.getvalue()

    @staticmethod
    def parse_csv(text: str) -> dict:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != STEP_HEADER:
            raise ValueError(f"expected header {','.join(STEP_HEADER)}")
        cols = np.array([[float(x) for x in r] for r in rows[1:] if r]).T
        return dict(zip(STEP_HEADER, cols))


def run_step_response(schedule: StepSchedule, geom: CoilGeometry = DEFAULT_COIL,
                      params: Optional[SystemParams] = None,
                      cfg: Optional[IntegrationConfig] = None, window: float = 20.0,
                      threshold: float = 1e-3,
                      initial: Optional[AmplitudeState] = None) -> StepResponse:
    """Integrate through sudden distance changes without resetting the state."""
    if params is None:
        params = SystemParams(1.0, 1.0, 0.0, 0.04, SaturableGain(3.0, 0.05))
    if not isinstance(params.gain, SaturableGain):
        raise ValueError("step response is defined for the saturable-gain dimer")
    cfg = cfg or IntegrationConfig(t_end=schedule.segments[-1][0] + 100.0)
    if not cfg.t_end > schedule.segments[-1][0]:
        raise ValueError("t_end must lie beyond the last step")
    omega0 = params.omega_a
    kappas = [(t, kappa_of_distance(geom, d, omega0)) for t, d in schedule.segments]
    traj = integrate(params.with_kappa(kappas[0][1]), initial, cfg, schedule=kappas)
    starts = np.array([t for t, _ in schedule.segments])
    seg_index = np.clip(np.searchsorted(starts, traj.t, side="right") - 1, 0, len(starts) - 1)
    distance = np.array([d for _, d in schedule.segments])[seg_index]

    reports = []
    for t0, t1 in schedule.bounds(cfg.t_end):
        seg = traj.between(t0, t1)
        if len(seg) < 2 or seg.t[-1] - seg.t[0] < 2 * window:
            reports.append(SteadyStateReport(False, math.nan, math.nan, math.nan, math.nan))
        else:
            reports.append(detect_steady_state(seg, window, threshold))
    return StepResponse(traj, distance, schedule, reports)


@dataclass
class StorageComparison:
    trajectory: Trajectory
    e_closed: Optional[np.ndarray] = None
    e_a_closed: Optional[np.ndarray] = None

    @property
    def t(self):
        return self.trajectory.t

    @property
    def e(self):
        return self.trajectory.e

    @property
    def e_a(self):
        return self.trajectory.e_a


def run_storage_comparison(params: SystemParams,
                           cfg: Optional[IntegrationConfig] = None) -> StorageComparison:
    """Transfer energy E and storage energy E_A along one run.

    For the balanced linear dimer the closed forms are evaluated on the same
    time grid.
    """
    cfg = cfg or IntegrationConfig(t_end=20.0)
    traj = integrate(params, AmplitudeState(), cfg)
    if (isinstance(params.gain, LinearGain) and params.gain.g == params.gamma
            and params.is_resonant):
        sol = LinearSolution(params.kappa, params.gamma, params.omega_a)
        return StorageComparison(traj, transfer_energy_closed_form(sol, traj.t),
                                 storage_energy_closed_form(sol, traj.t))
    return StorageComparison(traj)
