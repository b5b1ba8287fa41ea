"""Chain mapping of bosonic environments and dynamics on the mapped chains."""

from .chainmap import (
    ChainCoefficients,
    DiscretizedMeasure,
    asymptotic_limits,
    default_node_count,
    discretize,
    lightcone_length,
    recurrence_coefficients,
)
from .errors import NumericalError, ParameterError
from .full_dynamics import (
    EvolutionControls,
    FullDynamicsRecord,
    SpinBosonModel,
    build_model,
    convergence_sweep,
    evolve,
    occupation_profile,
)
from .single_excitation import (
    TridiagonalHamiltonian,
    WavepacketTrajectory,
    beating_period,
    default_fit_window,
    fit_decay_rate,
    front_position,
    front_speed,
    localization_fraction,
    propagate,
    star_oracle,
)
from .spectral import (
    KB_CM_PER_K,
    Lorentzian,
    Ohmic,
    SpectralDensity,
    Tabulated,
    choose_hard_cutoff,
    inverse_temperature,
    reorganization_tail_ratio,
)

__all__ = [
    "KB_CM_PER_K",
    "NumericalError",
    "ParameterError",
    "SpectralDensity",
    "Lorentzian",
    "Ohmic",
    "Tabulated",
    "inverse_temperature",
    "reorganization_tail_ratio",
    "choose_hard_cutoff",
    "DiscretizedMeasure",
    "ChainCoefficients",
    "discretize",
    "recurrence_coefficients",
    "asymptotic_limits",
    "lightcone_length",
    "default_node_count",
    "TridiagonalHamiltonian",
    "WavepacketTrajectory",
    "propagate",
    "star_oracle",
    "fit_decay_rate",
    "default_fit_window",
    "front_position",
    "front_speed",
    "localization_fraction",
    "beating_period",
    "SpinBosonModel",
    "EvolutionControls",
    "FullDynamicsRecord",
    "build_model",
    "evolve",
    "convergence_sweep",
    "occupation_profile",
]

__version__ = "0.1.0"
