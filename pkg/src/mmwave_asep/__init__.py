"""Average symbol error probability of mmWave cellular downlinks.

Analytic pipeline (hypergeometric interference CFs, Gil-Pelaez inversion,
serving-distance averaging) plus an independent Monte Carlo simulator of the
same stochastic-geometry model.
"""

from .errorprob import (
    AsepResult,
    BeamErrorModel,
    Scenario,
    apep,
    apep_with_beam_error,
    asep,
    cdf_ure,
    evaluate_asep,
    misalignment_gain_pdf,
    pep_conditional,
)
from .errors import NumericFailure, ParameterError
from .interference import CfContext, cf_aggregate, cf_los_closed, cf_nlos_closed, cf_noise, cf_total
from .mc import McConfig, McEstimate, estimate_asep, estimate_cdf_ure, estimate_pep, empirical_cf
from .model import (
    AntennaPattern,
    GainDistribution,
    LinkBudget,
    Modulation,
    NetworkParams,
    gain_distribution,
    serving_distance_pdf,
)

__all__ = [
    "AntennaPattern", "AsepResult", "BeamErrorModel", "CfContext", "GainDistribution",
    "LinkBudget", "McConfig", "McEstimate", "Modulation", "NetworkParams", "NumericFailure",
    "ParameterError", "Scenario", "apep", "apep_with_beam_error", "asep", "cdf_ure", "cf_aggregate",
    "cf_los_closed", "cf_nlos_closed", "cf_noise", "cf_total", "empirical_cf", "estimate_asep",
    "estimate_cdf_ure", "estimate_pep", "evaluate_asep", "gain_distribution",
    "misalignment_gain_pdf", "pep_conditional", "serving_distance_pdf",
]
