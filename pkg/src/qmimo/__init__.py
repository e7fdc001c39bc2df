"""Analysis and simulation toolkit for coarsely quantized massive-MIMO uplinks.

The package provides four layers:

- qmimo.analytic / qmimo.ber: closed-form SINR and BER expressions for
  square M-QAM with zero-forcing detection under low-resolution ADCs and
  LMMSE channel estimation;
- qmimo.quantizer / qmimo.qam: Lloyd-Max codebook design and Gray-QAM
  mapping used by the link simulator;
- qmimo.simulator: a seeded, reproducible Monte Carlo uplink simulator
  that validates the closed forms;
- qmimo.solvers: design-scenario searches (required power, pilot/power
  compensation frontiers, minimum antennas, maximum users, power-optimal
  ADC resolution).
"""

from .analytic import (
    FULL_PRECISION,
    TABLE_ALPHA,
    EstimationQuality,
    LinkParameters,
    QuantizerSpec,
    Regime,
    SinrModel,
    alpha_of_bits,
    combined_pilot_noise_variance,
    ebn0_to_pu,
    estimation_error_floor,
    estimation_variances,
    gamma0,
    gamma0_asymptote,
    joint_compensation,
    l_factor,
    pilot_compensation_estimation,
    pu_to_ebn0,
)
from .ber import (
    BerTerms,
    awgn_mqam_ber,
    ber_closed_form,
    ber_numeric_oracle,
    ber_two_term,
)
from .errors import INFEASIBLE, NumericFailure, is_feasible
from .qam import GrayQamMapper
from .quantizer import LloydMaxCodebook, design_codebook, empirical_alpha, quantize_block
from .simulator import (
    BerEstimate,
    CsiMode,
    EstimationErrorStats,
    LinkRealization,
    PilotMatrix,
    SimConfig,
    blocks_for_target,
    build_pilots,
    draw_realization,
    estimate_channel,
    run_ber,
    run_estimation_error,
    zf_detect,
)
from .solvers import (
    CurveCrossing,
    FeasibilityPoint,
    PowerCurvePoint,
    PowerModel,
    PowerSearchResult,
    frontier_tau_power,
    max_users,
    min_antennas,
    power_optimal_resolution,
    required_ebn0,
    total_power,
)

__version__ = "0.1.0"
