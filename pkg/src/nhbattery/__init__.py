"""Coupled-mode model of a gain/loss resonator pair used as a wirelessly charged battery.

The package covers the linear and saturable-gain dimer (spectra, closed-form
and integrated dynamics), coil coupling versus distance, distance/loss sweeps
and step transients, and a transient LC-circuit realisation.
"""
from .core import (
    AmplitudeState,
    LinearGain,
    SaturableGain,
    SpectralRegion,
    SystemParams,
    average_power,
    classify_region,
    pt_linear,
    pt_saturable,
    storage_energy,
    transfer_energy,
)
from .spectral import (
    EigenSet,
    characteristic_residual,
    exceptional_arc,
    linear_eigenfrequencies,
    nonlinear_eigenfrequencies,
    saturated_gain,
)
from .analytic import LinearSolution
from .dynamics import (
    IntegrationConfig,
    Trajectory,
    detect_steady_state,
    integrate,
    measure_mode_frequency,
)
from .coupling import CoilGeometry, CouplingCurve, coupling_curve, kappa_of_distance
from .scenarios import (
    StepSchedule,
    SweepGrid,
    run_step_response,
    run_storage_comparison,
    run_sweep,
)
from .circuit import (
    CircuitParams,
    CircuitState,
    DiodeNetwork,
    DiodeParams,
    LinearBuffer,
    crossvalidate,
    extract_envelope,
    map_to_coupled_mode,
    simulate_circuit,
)

__all__ = [
    "CoilGeometry",
    "CouplingCurve",
    "coupling_curve",
    "kappa_of_distance",
    "AmplitudeState",
    "LinearGain",
    "SaturableGain",
    "SpectralRegion",
    "SystemParams",
    "average_power",
    "classify_region",
    "pt_linear",
    "pt_saturable",
    "storage_energy",
    "transfer_energy",
    "EigenSet",
    "characteristic_residual",
    "exceptional_arc",
    "linear_eigenfrequencies",
    "nonlinear_eigenfrequencies",
    "saturated_gain",
    "IntegrationConfig",
    "Trajectory",
    "detect_steady_state",
    "integrate",
    "measure_mode_frequency",
    "StepSchedule",
    "SweepGrid",
    "run_step_response",
    "run_storage_comparison",
    "run_sweep",
    "CircuitParams",
    "CircuitState",
    "DiodeNetwork",
    "DiodeParams",
    "LinearBuffer",
    "crossvalidate",
    "extract_envelope",
    "map_to_coupled_mode",
    "simulate_circuit",
    "LinearSolution",
]

__version__ = "0.1.0"
