"""Closed-form analysis of a coarsely quantized massive-MIMO uplink.

Everything here is scalar, deterministic math: the AQNM linear gain of a
Lloyd-Max quantizer, LMMSE channel-estimation error variances under
quantized pilots, the post-detection SINR scale factor for zero-forcing
with perfect or estimated CSI, compensation rules that trade pilot length
against transmit power, and unit conversions between Eb/N0 and linear SNR.

All functions are pure; they can be called from any number of threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import INFEASIBLE

#: Distinguished quantizer resolution meaning "no quantization at all".
FULL_PRECISION = "full"

#: AQNM linear gain of the variance-matched Lloyd-Max quantizer on a
#: Gaussian input, for 1..5 bit resolution (alpha = 1 - min distortion).
TABLE_ALPHA = {
    1: 0.6366,
    2: 0.8825,
    3: 0.96546,
    4: 0.990503,
    5: 0.997501,
}

#: Square-QAM orders supported by the BER analysis.
SUPPORTED_QAM_ORDERS = (4, 16, 64, 256)


class Regime(Enum):
    """Which channel knowledge and quantization quality the detector sees."""

    PERFECT_CSI_FULL_PREC = "perfect_csi_full_prec"
    PERFECT_CSI_QUANTIZED = "perfect_csi_quantized"
    IMPERFECT_CSI_FULL_PREC = "imperfect_csi_full_prec"
    IMPERFECT_CSI_QUANTIZED = "imperfect_csi_quantized"

    @property
    def uses_estimate(self) -> bool:
        return self in (Regime.IMPERFECT_CSI_FULL_PREC, Regime.IMPERFECT_CSI_QUANTIZED)

    @property
    def quantized(self) -> bool:
        return self in (Regime.PERFECT_CSI_QUANTIZED, Regime.IMPERFECT_CSI_QUANTIZED)


def alpha_of_bits(bits) -> float:
    """AQNM linear gain for a b-bit variance-matched Lloyd-Max quantizer.

    Tabulated for b <= 5; for higher resolutions the closed-form
    approximation alpha = 1 - (pi*sqrt(3)/2) * 2**(-2b) applies.
    FULL_PRECISION maps to exactly 1.
    """
    if bits == FULL_PRECISION:
        return 1.0
    if not isinstance(bits, (int,)) or isinstance(bits, bool):
        raise ValueError(f"bits must be a positive integer or FULL_PRECISION, got {bits!r}")
    if bits <= 0:
        raise ValueError(f"bits must be >= 1, got {bits}")
    if bits <= 5:
        return TABLE_ALPHA[bits]
    return 1.0 - (math.pi * math.sqrt(3.0) / 2.0) * 2.0 ** (-2 * bits)


@dataclass(frozen=True)
class QuantizerSpec:
    """ADC resolution and its AQNM linear gain.

    ``bits`` is a positive integer or FULL_PRECISION; ``alpha`` lies in
    (0, 1] and equals 1 exactly iff the spec is full precision.
    """

    bits: object
    alpha: float

    def __post_init__(self):
        if self.bits == FULL_PRECISION:
            if self.alpha != 1.0:
                raise ValueError("full-precision spec requires alpha == 1")
            return
        if not isinstance(self.bits, int) or isinstance(self.bits, bool) or self.bits < 1:
            raise ValueError(f"bits must be >= 1 or FULL_PRECISION, got {self.bits!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.bits <= 5 and abs(self.alpha - TABLE_ALPHA[self.bits]) > 5e-4:
            raise ValueError(
                f"alpha={self.alpha} inconsistent with {self.bits}-bit gain "
                f"{TABLE_ALPHA[self.bits]}"
            )

    @classmethod
    def from_bits(cls, bits) -> "QuantizerSpec":
        return cls(bits=bits, alpha=alpha_of_bits(bits))

    @classmethod
    def full_precision(cls) -> "QuantizerSpec":
        return cls(bits=FULL_PRECISION, alpha=1.0)

    @property
    def is_full_precision(self) -> bool:
        return self.bits == FULL_PRECISION


@dataclass(frozen=True)
class LinkParameters:
    """Operating point of the uplink.

    pilot_len is a positive real in analytic use (solvers sweep it
    continuously) and must be an integer >= n_users when the Monte Carlo
    simulator builds actual pilot sequences. It may be None for
    perfect-CSI analysis where no training phase exists.
    """

    n_antennas: int
    n_users: int
    pilot_len: float | None
    tx_power: float
    mod_order: int

    def __post_init__(self):
        if self.n_users < 1:
            raise ValueError(f"n_users must be >= 1, got {self.n_users}")
        if self.n_antennas < self.n_users:
            raise ValueError(
                f"n_antennas ({self.n_antennas}) must be >= n_users ({self.n_users})"
            )
        if self.pilot_len is not None and self.pilot_len <= 0:
            raise ValueError(f"pilot_len must be positive, got {self.pilot_len}")
        if self.tx_power <= 0:
            raise ValueError(f"tx_power must be positive, got {self.tx_power}")
        if self.mod_order not in SUPPORTED_QAM_ORDERS:
            raise ValueError(
                f"mod_order must be one of {SUPPORTED_QAM_ORDERS}, got {self.mod_order}"
            )

    @property
    def diversity_order(self) -> int:
        """Branches of the post-ZF chi-square SNR: N - K + 1."""
        return self.n_antennas - self.n_users + 1


@dataclass(frozen=True)
class EstimationQuality:
    """Variance split of the unit-variance channel into estimate and error."""

    var_estimate: float
    var_error: float

    def __post_init__(self):
        if not (0.0 <= self.var_estimate <= 1.0 and 0.0 <= self.var_error <= 1.0):
            raise ValueError("variances must lie in [0, 1]")
        if abs(self.var_estimate + self.var_error - 1.0) > 1e-12:
            raise ValueError("estimate and error variances must sum to 1")


@dataclass(frozen=True)
class SinrModel:
    """Deterministic SINR scale gamma0 and the chi-square degrees of freedom.

    The per-user post-detection SINR is gamma0 times a chi-square variate
    with ``dof`` = 2(N-K+1) degrees of freedom (normalized to mean dof/2).
    """

    regime: Regime
    gamma0: float
    dof: int

    def __post_init__(self):
        if self.dof < 2 or self.dof % 2 != 0:
            raise ValueError(f"dof must be an even positive integer, got {self.dof}")
        if self.gamma0 < 0:
            raise ValueError(f"gamma0 must be nonnegative, got {self.gamma0}")


def l_factor(alpha: float, tx_power: float, n_users: int) -> float:
    """Quantization loss factor L = 1 + ((1-alpha)/alpha)(K*pu + 1).

    Equals 1 exactly at full precision and grows with load K*pu; it
    multiplies the effective noise in every quantized closed form.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    if tx_power <= 0:
        raise ValueError(f"tx_power must be positive, got {tx_power}")
    if n_users < 1:
        raise ValueError(f"n_users must be >= 1, got {n_users}")
    return 1.0 + ((1.0 - alpha) / alpha) * (n_users * tx_power + 1.0)


def estimation_variances(params: LinkParameters, quant: QuantizerSpec) -> EstimationQuality:
    """Per-entry variances of the LMMSE channel estimate and its error.

    var_estimate = tau*pu / (L + tau*pu) and var_error = L / (L + tau*pu);
    with alpha = 1 this reduces to the classical unquantized-pilot result
    1/(1 + tau*pu) for the error.
    """
    if params.pilot_len is None:
        raise ValueError("pilot_len is required to evaluate estimation variances")
    tau, pu = params.pilot_len, params.tx_power
    lf = l_factor(quant.alpha, pu, params.n_users)
    return EstimationQuality(
        var_estimate=tau * pu / (lf + tau * pu),
        var_error=lf / (lf + tau * pu),
    )


def estimation_error_floor(alpha: float, n_users: int, pilot_len: float) -> float:
    """Limit of the estimation error variance as transmit power grows.

    (1-alpha)K / ((1-alpha)K + alpha*tau): nonzero whenever alpha < 1, so
    power alone cannot drive the quantized estimation error to zero.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    return (1.0 - alpha) * n_users / ((1.0 - alpha) * n_users + alpha * pilot_len)


def pilot_compensation_estimation(
    tau_ref: float, pu_ref: float, pu_q: float, alpha: float, n_users: int
) -> float:
    """Minimal pilot length for a quantized system to match a reference
    estimation-error variance.

    The unquantized reference runs (tau_ref, pu_ref); the b-bit system runs
    at power pu_q and needs tau_q >= tau_ref * (pu_ref/pu_q) * L(alpha, pu_q)
    to achieve an equal or smaller error variance.
    """
    if tau_ref <= 0 or pu_ref <= 0 or pu_q <= 0:
        raise ValueError("tau_ref, pu_ref and pu_q must be positive")
    return tau_ref * (pu_ref / pu_q) * l_factor(alpha, pu_q, n_users)


def gamma0(params: LinkParameters, quant: QuantizerSpec, regime: Regime) -> SinrModel:
    """SINR scale factor for the selected CSI/quantization regime.

    Perfect CSI: pu (full precision) or pu/L (quantized). Imperfect CSI:
    pu^2*tau/(1+(K+tau)*pu), with both noise terms inflated by L in the
    quantized case. Full-precision regimes ignore ``quant``.
    """
    pu, K = params.tx_power, params.n_users
    if regime.uses_estimate:
        if params.pilot_len is None:
            raise ValueError(f"pilot_len is required for regime {regime.name}")
        tau = params.pilot_len
    if regime is Regime.PERFECT_CSI_FULL_PREC:
        g0 = pu
    elif regime is Regime.PERFECT_CSI_QUANTIZED:
        g0 = pu / l_factor(quant.alpha, pu, K)
    elif regime is Regime.IMPERFECT_CSI_FULL_PREC:
        g0 = pu * pu * tau / (1.0 + (K + tau) * pu)
    else:
        lf = l_factor(quant.alpha, pu, K)
        g0 = pu * pu * tau / (lf * (lf + (K + tau) * pu))
    return SinrModel(regime=regime, gamma0=g0, dof=2 * params.diversity_order)


def gamma0_asymptote(
    quant: QuantizerSpec, n_users: int, pilot_len: float | None = None
) -> float:
    """Ceiling of gamma0 as transmit power grows without bound.

    Perfect CSI (pilot_len None): alpha/(K(1-alpha)). Imperfect CSI: the
    same ceiling shrunk by alpha*tau/(K + alpha*tau). Unbounded (returned
    as +inf) at full precision.
    """
    alpha = quant.alpha
    if alpha >= 1.0:
        return math.inf
    ceiling = alpha / (n_users * (1.0 - alpha))
    if pilot_len is None:
        return ceiling
    return ceiling * (alpha * pilot_len / (n_users + alpha * pilot_len))


def joint_compensation(
    tau_ref: float, pu_ref: float, pu_q: float, alpha: float, n_users: int
) -> float:
    """Minimal pilot length equalizing gamma0 between a quantized system at
    power pu_q and a full-precision reference at (pu_ref, tau_ref).

    Returns INFEASIBLE when no finite pilot length can close the gap (the
    quantized gamma0 ceiling lies below the reference even as tau grows).
    """
    if tau_ref <= 0 or pu_ref <= 0 or pu_q <= 0:
        raise ValueError("tau_ref, pu_ref and pu_q must be positive")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    K = n_users
    lf = l_factor(alpha, pu_q, K)
    denom = pu_q * pu_q * (1.0 + (K + tau_ref) * pu_ref) - pu_q * pu_ref * pu_ref * tau_ref * lf
    if denom <= 0:
        return INFEASIBLE
    return pu_ref * pu_ref * tau_ref * lf * (lf + K * pu_q) / denom


def ebn0_to_pu(ebn0_db: float, mod_order: int) -> float:
    """Linear per-user SNR from Eb/N0 in dB: pu = 2*log2(M)*10^(Eb/N0/10)."""
    if mod_order not in SUPPORTED_QAM_ORDERS:
        raise ValueError(f"mod_order must be one of {SUPPORTED_QAM_ORDERS}, got {mod_order}")
    return 2.0 * math.log2(mod_order) * 10.0 ** (ebn0_db / 10.0)


def pu_to_ebn0(pu: float, mod_order: int) -> float:
    """Inverse of ebn0_to_pu."""
    if mod_order not in SUPPORTED_QAM_ORDERS:
        raise ValueError(f"mod_order must be one of {SUPPORTED_QAM_ORDERS}, got {mod_order}")
    if pu <= 0:
        raise ValueError(f"pu must be positive, got {pu}")
    return 10.0 * math.log10(pu / (2.0 * math.log2(mod_order)))


def combined_pilot_noise_variance(alpha: float, tx_power: float, n_users: int) -> float:
    """Variance of the combined additive-plus-quantization noise seen by the
    pilot-phase LMMSE estimator: alpha^2 + alpha(1-alpha)(K*pu + 1)."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    if tx_power <= 0:
        raise ValueError(f"tx_power must be positive, got {tx_power}")
    return alpha * alpha + alpha * (1.0 - alpha) * (n_users * tx_power + 1.0)
