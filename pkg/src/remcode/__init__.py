"""Statistical-physics view of random block codes, computationally.

Phase diagram of finite-temperature decoding over a DMC, correct-decoding
and random-coding error exponents via their free-energy formulas, and a
Monte Carlo random-codebook simulator that checks the analytic picture.
"""

__version__ = "0.1.0"

from .channel import (
    Channel,
    ChannelFormatError,
    ConditionalDistribution,
    OutputDistribution,
    binary_divergence,
    binary_entropy,
    bsc,
    channel_from_json,
    energy_matrix,
    gv_distance_bsc,
    load_channel,
    mutual_information_uniform,
    output_marginal_uniform,
    uniform_input_information,
)
from .gibbs import (
    BETA_MAX,
    BetaSolve,
    GibbsState,
    InfeasibleEnergyError,
    InfeasibleRateError,
    UnreachableOutputError,
    beta_at_rate,
    bsc_flip_probability,
    entropy_energy_max,
    gibbs_state,
    max_entropy_at_energy,
    min_typical_energy,
)
from .phases import (
    BoundaryCurve,
    PhasePoint,
    boundary_curves,
    bsc_critical_beta,
    bsc_ferro_boundary_beta,
    bsc_glassy_free_energy,
    bsc_para_free_energy,
    classify,
    critical_beta,
    ferro_boundary_beta,
    ferro_free_energy,
    free_energy_glassy,
    free_energy_para,
    universal_classify,
)
from .exponents import (
    ExponentResult,
    correct_decoding_exponent,
    error_exponent,
    gallager_e0,
    optimize_rho,
    tilted_log_marginal,
)
from .simulate import (
    EventSummary,
    FreeEnergySummary,
    RankSummary,
    SimConfig,
    SpectrumBin,
    SpectrumSample,
    WorkBoundError,
    bsc_populated_tail_exact,
    collect_samples,
    empirical_free_energy,
    event_probabilities,
    rank_statistics,
    sample_spectrum,
    symbolwise_marginal,
    trial_rng,
)
