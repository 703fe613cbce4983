"""Energy efficiency of relay-assisted cellular networks under a stochastic-geometry model."""

__version__ = "0.1.0"

from .cell_load import busy_probabilities, cell_area_pdf, count_distribution_disc, count_distribution_voronoi
from .coop import coop_rate, decode_probability, rs_link_cdf, rs_link_rate
from .config import ExperimentConfig, load_config
from .energy import PowerModel, energy_efficiency, relay_free_baseline
from .montecarlo import McConfig, estimate_rates_and_ee, estimate_sinr_cdf, simulate
from .params import InvalidParameterError, NetworkParams, dbm_to_watts, reference_params, validate
from .sinr import ConvergenceError, mean_rate_noncoop, phi, sinr_cdf_noncoop

__all__ = [
    "ConvergenceError", "ExperimentConfig", "InvalidParameterError", "McConfig", "NetworkParams", "PowerModel",
    "busy_probabilities", "cell_area_pdf", "coop_rate", "count_distribution_disc",
    "count_distribution_voronoi", "dbm_to_watts", "decode_probability", "energy_efficiency",
    "estimate_rates_and_ee", "estimate_sinr_cdf", "load_config",
    "mean_rate_noncoop", "phi", "reference_params", "relay_free_baseline", "rs_link_cdf",
    "rs_link_rate", "simulate", "sinr_cdf_noncoop", "validate",
]
