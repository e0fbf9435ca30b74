"""Hybrid precoding for multiuser OFDM mmWave MIMO with double-phase-shifter analog networks."""

__version__ = "0.1.0"

from .altmin import (AltMinHistory, HybridPrecoder, design_hybrid_combiner,
                     exact_decompose_single_carrier, lasso_altmin, normalize_power,
                     opp_digital_update, project_modulus, solve_analog_oracle)
from .channel import (ChannelSet, RayParameters, array_response_ula, build_channel,
                      generate_channel_set, sample_ray_parameters)
from .config import DESK, PAPER, SystemConfig, parse_config
from .digital import FullyDigitalPrecoder, bd_fully_digital
from .errors import (ConfigError, DegenerateChannel, InsufficientNullSpace, NonConvergence,
                     RankDeficient, SingularCovarianceWarning, ZeroMatrix, ZeroProduct)
from .evaluation import ExperimentResult, run_trial, spectral_efficiency, sweep
from .interference import bd_cancel, cascade, cancel_interference, effective_channel
from .omp import Dictionary, build_dictionary, omp_hybrid

__all__ = [
    "AltMinHistory", "HybridPrecoder", "design_hybrid_combiner", "exact_decompose_single_carrier",
    "lasso_altmin", "normalize_power", "opp_digital_update", "project_modulus",
    "solve_analog_oracle", "ChannelSet", "RayParameters", "array_response_ula", "build_channel",
    "generate_channel_set", "sample_ray_parameters", "DESK", "PAPER", "SystemConfig",
    "parse_config", "FullyDigitalPrecoder", "bd_fully_digital", "ConfigError",
    "DegenerateChannel", "InsufficientNullSpace", "NonConvergence", "RankDeficient",
    "SingularCovarianceWarning", "ZeroMatrix", "ZeroProduct", "ExperimentResult", "run_trial",
    "spectral_efficiency", "sweep", "bd_cancel", "cascade", "cancel_interference",
    "effective_channel", "Dictionary", "build_dictionary", "omp_hybrid",
]
