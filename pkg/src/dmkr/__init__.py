"""Dissipative modified kicked rotator: classical and quantum dynamics,
OTOC decay, transfer-operator and quantum-channel spectra."""

from .analysis import (
    ComparisonRow,
    FitResult,
    SweepConfig,
    fit_decay_rate,
    growth_rate,
    k_sweep,
    log_linear_fit,
    rescale,
)
from .classical import (
    PhasePoint,
    averaged_max_lyapunov,
    bifurcation_scan,
    force,
    jacobian,
    lyapunov_spectrum,
    map_step,
    max_lyapunov,
)
from .observables import (
    EquilibriumResult,
    HusimiMap,
    TimeSeries,
    equilibrium_state,
    husimi,
    ipr,
    otoc_series,
)
from .params import NO_NOISE, MapParams, NoiseSpec
from .quantum import (
    HilbertSpace,
    PropagatorConfig,
    build_observables,
    build_period_propagators,
    coherent_state,
    density_from_state,
    dissipator_apply,
    evolve_period,
)
from .spectra import (
    SpectrumResult,
    channel_spectrum,
    matrix_spectrum,
    spectral_gap_rate,
)
from .ulam import TransitionMatrix, UlamGrid, build_ulam_matrix, stationary_density

__version__ = "0.1.0"

__all__ = [
    "ComparisonRow", "EquilibriumResult", "FitResult", "HilbertSpace",
    "HusimiMap", "MapParams", "NO_NOISE", "NoiseSpec", "PhasePoint",
    "PropagatorConfig", "SpectrumResult", "SweepConfig", "TimeSeries",
    "TransitionMatrix", "UlamGrid", "averaged_max_lyapunov",
    "bifurcation_scan", "build_observables", "build_period_propagators",
    "build_ulam_matrix", "channel_spectrum", "coherent_state",
    "density_from_state", "dissipator_apply", "equilibrium_state",
    "evolve_period", "fit_decay_rate", "force", "growth_rate", "husimi",
    "ipr", "jacobian", "k_sweep", "log_linear_fit", "lyapunov_spectrum",
    "map_step", "matrix_spectrum", "max_lyapunov", "otoc_series", "rescale",
    "spectral_gap_rate", "stationary_density", "__version__",
]
