"""Secrecy rate maximization for a multi-carrier MIMO wiretap channel
with a full-duplex jamming receiver."""

from .channel import (ChannelRealization, SystemParams, db2lin, draw_channels,
                      lin2db, perturb_csi, trial_seed)
from .errors import (ConfigError, DegenerateChannel, DimensionMismatch,
                     FdWiretapError, InfeasibleStart, NonPositiveDefinite,
                     NumericalTrouble, UnknownStrategy, WrongDimension)
from .system_model import (BidirectionalDesign, SecrecyReport, TransmitDesign,
                           secrecy_rates, secrecy_rates_bidirectional)
from .bcd import (init_optimal_beam, init_random, init_uniform, optimize,
                  optimize_bidirectional)
from .waterfill import Allocation, SubcarrierGains
from .harness import ExperimentConfig, ExperimentResult, run_experiment
from . import waterfill  # keep the submodule reachable as an attribute

__version__ = "0.1.0"

__all__ = [
    "Allocation", "BidirectionalDesign", "ChannelRealization", "ConfigError",
    "DegenerateChannel", "DimensionMismatch", "ExperimentConfig",
    "ExperimentResult", "FdWiretapError", "InfeasibleStart",
    "NonPositiveDefinite", "NumericalTrouble", "SecrecyReport",
    "SubcarrierGains", "SystemParams", "TransmitDesign", "UnknownStrategy",
    "WrongDimension", "db2lin", "draw_channels", "init_optimal_beam",
    "init_random", "init_uniform", "lin2db", "optimize",
    "optimize_bidirectional", "perturb_csi", "run_experiment",
    "secrecy_rates", "secrecy_rates_bidirectional", "trial_seed",
    "__version__",
]
