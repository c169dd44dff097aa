"""Spinal codes: encoder, fading channels, exhaustive ML decoder, and the
finite-blocklength analysis toolchain (BLER upper bound, error floor, SNR
thresholds) with a reproducible Monte Carlo sweep harness."""

__version__ = "0.1.0"

from .codec import (
    BudgetExceededError,
    CodeParams,
    Constellation,
    Message,
    ObservationGrid,
    build_constellation,
    encode,
    hash_step,
    ml_decode,
    registered_hashes,
    rng_symbol,
    segment_costs,
    spine_chain,
)
from .channel import (
    ChannelModel,
    NoiseSpec,
    sample_fading,
    sigma_from_snr,
    snr_from_sigma,
    transmit,
)
from .analysis import (
    BoundResult,
    DistanceSpectrum,
    FloorResult,
    QuadratureScheme,
    ThresholdResult,
    bler_upper_bound,
    distance_spectrum,
    error_floor,
    f_term,
    fading_exp_moment,
    g_value,
    pairwise_expectation,
    quadrature_uniform,
    snr_threshold,
)
from .montecarlo import (
    BlerEstimate,
    StopRule,
    SweepRecord,
    TrialPlan,
    estimate_bler,
    run_trial,
    sweep,
    wilson_interval,
)

__all__ = [
    "BudgetExceededError", "CodeParams", "Constellation", "Message",
    "ObservationGrid", "build_constellation", "encode", "hash_step",
    "ml_decode", "registered_hashes", "rng_symbol", "segment_costs",
    "spine_chain",
    "ChannelModel", "NoiseSpec", "sample_fading", "sigma_from_snr",
    "snr_from_sigma", "transmit",
    "BoundResult", "DistanceSpectrum", "FloorResult", "QuadratureScheme",
    "ThresholdResult", "bler_upper_bound", "distance_spectrum", "error_floor",
    "f_term", "fading_exp_moment", "g_value", "pairwise_expectation",
    "quadrature_uniform", "snr_threshold",
    "BlerEstimate", "StopRule", "SweepRecord", "TrialPlan", "estimate_bler",
    "run_trial", "sweep", "wilson_interval",
]
