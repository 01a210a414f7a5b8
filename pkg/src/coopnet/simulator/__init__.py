"""
Cooperative relay simulator

Channel model, the multi-stream cooperation protocol, reference schemes,
closed-form analysis and the Monte-Carlo engine that ties them together.
"""

from .analysis import (
    BoundBreakdown,
    DmtPoint,
    TrtCoefficients,
    best_decoding_threshold,
    direct_outage_probability,
    dmt_ddf,
    dmt_msc,
    dmt_msc_opt,
    dmt_sdiv,
    k_star,
    listening_length_pmf,
    outage_bound_breakdown,
    outage_bound_discrete,
    outage_upper_bound,
    phi,
    phi_derivative,
    predicted_snr_shift_db,
    trt_coefficients,
)
from .baselines import mi_af_sdiv, mi_ddf, mi_df_msc_rand, mi_df_sdiv, scheme_profile
from .channel import ChannelRealization, ListeningOutcome, SystemParams, decode_time, draw_channel, listening_outcome
from .config import Scheme
from .engine import (
    EstimateWithCI,
    MonteCarloEngine,
    SweepResult,
    TrialResult,
    create_engine,
    estimate_outage,
    measure_snr_shift_db,
    outage_capacity,
    run_trial,
    snr_sweep,
)
from .numerics import SeedStream, binomial_coefficient, capacity_logdet, regularized_gamma_cdf, sample_complex_gaussian
from .protocol_msc import (
    FeedbackPattern,
    NodeSelection,
    decode_feedback_pattern,
    encode_feedback_pattern,
    enumerate_selections,
    mutual_information_msc,
    optimal_selection,
    outage_indicator,
    random_selection,
)

__all__ = [
    'BoundBreakdown',
    'ChannelRealization',
    'DmtPoint',
    'EstimateWithCI',
    'FeedbackPattern',
    'ListeningOutcome',
    'MonteCarloEngine',
    'NodeSelection',
    'Scheme',
    'SeedStream',
    'SweepResult',
    'SystemParams',
    'TrialResult',
    'TrtCoefficients',
    'best_decoding_threshold',
    'binomial_coefficient',
    'capacity_logdet',
    'create_engine',
    'decode_feedback_pattern',
    'decode_time',
    'direct_outage_probability',
    'dmt_ddf',
    'dmt_msc',
    'dmt_msc_opt',
    'dmt_sdiv',
    'draw_channel',
    'encode_feedback_pattern',
    'enumerate_selections',
    'estimate_outage',
    'k_star',
    'listening_length_pmf',
    'listening_outcome',
    'measure_snr_shift_db',
    'mi_af_sdiv',
    'mi_ddf',
    'mi_df_msc_rand',
    'mi_df_sdiv',
    'mutual_information_msc',
    'optimal_selection',
    'outage_bound_breakdown',
    'outage_bound_discrete',
    'outage_capacity',
    'outage_indicator',
    'outage_upper_bound',
    'phi',
    'phi_derivative',
    'predicted_snr_shift_db',
    'random_selection',
    'regularized_gamma_cdf',
    'run_trial',
    'sample_complex_gaussian',
    'scheme_profile',
    'snr_sweep',
    'trt_coefficients',
]
