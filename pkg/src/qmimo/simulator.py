"""Seeded Monte Carlo uplink link simulator.

Per block: draw an i.i.d. Rayleigh channel, transmit orthogonal DFT pilots,
quantize, form the LMMSE channel estimate, then transmit Gray-QAM data,
quantize, zero-force detect and count bit errors. Blocks are independent
work units seeded by (master seed, block index), so error counts are
bit-identical for a given config no matter how many workers run them.

The quantizer is variance-matched per receive antenna to the statistical
power of that antenna's input given the block's channel, pu*||h_i||^2 + 1
per complex sample, in both the pilot and data phases.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import linalg

from .analytic import FULL_PRECISION, LinkParameters, QuantizerSpec, l_factor
from .errors import NumericFailure
from .qam import GrayQamMapper
from .quantizer import LloydMaxCodebook, design_codebook, quantize_block
from .rng import block_generator, complex_normal


class CsiMode(Enum):
    PERFECT = "perfect"
    ESTIMATED = "estimated"


@dataclass(frozen=True)
class PilotMatrix:
    """K x tau pilot matrix with unit-modulus entries and orthogonal rows."""

    entries: np.ndarray

    def __post_init__(self):
        k, tau = self.entries.shape
        if k > tau:
            raise ValueError(f"pilot length {tau} must be >= n_users {k}")
        if np.max(np.abs(np.abs(self.entries) - 1.0)) > 1e-9:
            raise ValueError("pilot entries must have unit modulus")
        gram = self.entries @ self.entries.conj().T
        if np.max(np.abs(gram - tau * np.eye(k))) > 1e-6 * tau:
            raise ValueError("pilot rows must be orthogonal with norm sqrt(tau)")

    @property
    def n_users(self) -> int:
        return self.entries.shape[0]

    @property
    def pilot_len(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class LinkRealization:
    """One channel block: true channel, the detector's estimate, and the error."""

    channel: np.ndarray
    estimate: np.ndarray
    est_error: np.ndarray


@dataclass(frozen=True)
class SimConfig:
    params: LinkParameters
    quant: QuantizerSpec
    n_blocks: int
    symbols_per_block: int
    seed: int
    csi_mode: CsiMode = CsiMode.ESTIMATED

    def __post_init__(self):
        if self.n_blocks < 1:
            raise ValueError(f"n_blocks must be >= 1, got {self.n_blocks}")
        if self.symbols_per_block < 1:
            raise ValueError(f"symbols_per_block must be >= 1, got {self.symbols_per_block}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.csi_mode is CsiMode.ESTIMATED:
            tau = self.params.pilot_len
            if tau is None or tau != int(tau) or int(tau) < self.params.n_users:
                raise ValueError(
                    "estimated-CSI simulation needs integer pilot_len >= n_users, "
                    f"got {tau}"
                )


@dataclass(frozen=True)
class BerEstimate:
    ber: float
    ci_low: float
    ci_high: float
    bit_errors: int
    bits_simulated: int


@dataclass(frozen=True)
class EstimationErrorStats:
    value: float
    stderr: float
    n_blocks: int
    n_entries: int


def build_pilots(n_users: int, pilot_len: int) -> PilotMatrix:
    """First K rows of the tau-point DFT matrix: unit modulus, exact
    row orthogonality."""
    if pilot_len < n_users:
        raise ValueError(f"pilot_len ({pilot_len}) must be >= n_users ({n_users})")
    k = np.arange(n_users)[:, np.newaxis]
    t = np.arange(pilot_len)[np.newaxis, :]
    return PilotMatrix(entries=np.exp(-2j * np.pi * k * t / pilot_len))


def _cho_factor_checked(gram: np.ndarray, context: str):
    """Cholesky factor with an explicit conditioning check.

    LAPACK can slip through an exactly singular matrix on rounding alone,
    so tiny pivots are rejected here with a condition-number diagnostic.
    """
    try:
        cho = linalg.cho_factor(gram, lower=False, check_finite=False)
    except linalg.LinAlgError as exc:
        raise NumericFailure(
            f"{context}: matrix not positive definite "
            f"(cond={np.linalg.cond(gram):.3e})"
        ) from exc
    pivots = np.abs(np.real(np.diag(cho[0])))
    cond_est = (pivots.max() / pivots.min()) ** 2 if pivots.min() > 0 else math.inf
    if not math.isfinite(cond_est) or cond_est > 1e12:
        raise NumericFailure(
            f"{context}: matrix numerically rank deficient "
            f"(cond~{cond_est:.3e})"
        )
    return cho


def estimate_channel(
    received_pilots: np.ndarray,
    pilots: PilotMatrix,
    params: LinkParameters,
    quant: QuantizerSpec,
) -> np.ndarray:
    """LMMSE channel estimate from (possibly quantized) pilot observations.

    Solves (1/alpha) sqrt(pu) Y S^H (pu S S^H + L I)^{-1}; the same path
    with alpha = 1 (so L = 1) is the classical unquantized estimator.
    """
    pu = params.tx_power
    sp = pilots.entries
    lf = l_factor(quant.alpha, pu, params.n_users)
    gram = pu * (sp @ sp.conj().T) + lf * np.eye(pilots.n_users)
    rhs = math.sqrt(pu) * (received_pilots @ sp.conj().T)
    cho = _cho_factor_checked(gram, "pilot Gram matrix")
    solved = linalg.cho_solve(cho, rhs.conj().T, check_finite=False).conj().T
    return (1.0 / quant.alpha) * solved


def zf_detect(
    received: np.ndarray,
    estimate: np.ndarray,
    quant: QuantizerSpec,
    tx_power: float,
) -> np.ndarray:
    """Zero-forcing detection, normalized to unit-energy symbol estimates.

    Applies (1/alpha) (E^H E)^{-1} E^H through a Hermitian positive-definite
    factorization and divides by sqrt(pu), so the output feeds the QAM
    demapper directly.
    """
    received = np.atleast_2d(np.asarray(received))
    if received.shape[0] != estimate.shape[0]:
        received = received.T
    gram = estimate.conj().T @ estimate
    cho = _cho_factor_checked(gram, "channel estimate Gram matrix")
    detected = linalg.cho_solve(cho, estimate.conj().T @ received, check_finite=False)
    return detected / (quant.alpha * math.sqrt(tx_power))


def _antenna_variances(channel: np.ndarray, tx_power: float) -> np.ndarray:
    """Statistical per-antenna input power given the channel block."""
    return tx_power * np.sum(np.abs(channel) ** 2, axis=1) + 1.0


def _draw_estimate(rng, channel, params, quant, codebook):
    pilots = build_pilots(params.n_users, int(params.pilot_len))
    observed = math.sqrt(params.tx_power) * channel @ pilots.entries + complex_normal(
        rng, (params.n_antennas, pilots.pilot_len)
    )
    if not quant.is_full_precision:
        observed = quantize_block(observed, codebook, _antenna_variances(channel, params.tx_power))
    return estimate_channel(observed, pilots, params, quant)


def draw_realization(
    params: LinkParameters,
    quant: QuantizerSpec,
    seed: int,
    block_index: int = 0,
    csi_mode: CsiMode = CsiMode.ESTIMATED,
) -> LinkRealization:
    """Draw one channel block and its (estimated or perfect) CSI."""
    rng = block_generator(seed, block_index)
    channel = complex_normal(rng, (params.n_antennas, params.n_users))
    if csi_mode is CsiMode.PERFECT:
        estimate = channel.copy()
    else:
        codebook = None if quant.is_full_precision else design_codebook(quant.bits)
        estimate = _draw_estimate(rng, channel, params, quant, codebook)
    return LinkRealization(
        channel=channel, estimate=estimate, est_error=channel - estimate
    )


def _ber_blocks(config: SimConfig, codebook, block_indices):
    """Error and bit counts over a range of blocks (one worker's share)."""
    params, quant = config.params, config.quant
    n_ant, n_users = params.n_antennas, params.n_users
    pu = params.tx_power
    mapper = GrayQamMapper(params.mod_order)
    rail = mapper.rail_size
    errors = 0
    bits = 0
    for block in block_indices:
        rng = block_generator(config.seed, block)
        channel = complex_normal(rng, (n_ant, n_users))
        if config.csi_mode is CsiMode.PERFECT:
            estimate = channel
        else:
            estimate = _draw_estimate(rng, channel, params, quant, codebook)
        sent_i = rng.integers(0, rail, (n_users, config.symbols_per_block))
        sent_q = rng.integers(0, rail, (n_users, config.symbols_per_block))
        symbols = mapper.symbols_from_levels(sent_i, sent_q)
        received = math.sqrt(pu) * channel @ symbols + complex_normal(
            rng, (n_ant, config.symbols_per_block)
        )
        if not quant.is_full_precision:
            received = quantize_block(received, codebook, _antenna_variances(channel, pu))
        detected = zf_detect(received, estimate, quant, pu)
        errors += mapper.count_bit_errors_levels(sent_i, sent_q, detected)
        bits += mapper.bits_per_symbol * n_users * config.symbols_per_block
    return errors, bits


def _est_error_blocks(config: SimConfig, codebook, block_indices):
    """Per-block mean squared estimation error (one worker's share)."""
    params, quant = config.params, config.quant
    out = []
    for block in block_indices:
        rng = block_generator(config.seed, block)
        channel = complex_normal(rng, (params.n_antennas, params.n_users))
        estimate = _draw_estimate(rng, channel, params, quant, codebook)
        out.append(float(np.mean(np.abs(channel - estimate) ** 2)))
    return out


def _partition(n_blocks: int, n_workers: int):
    """Contiguous block index ranges, one list per worker slot."""
    shares = np.array_split(np.arange(n_blocks), max(1, n_workers))
    return [list(s) for s in shares if len(s)]


def _wilson_interval(errors: int, bits: int, z: float = 1.959963984540054):
    p = errors / bits
    denom = 1.0 + z * z / bits
    center = (p + z * z / (2 * bits)) / denom
    half = z * math.sqrt(p * (1.0 - p) / bits + z * z / (4.0 * bits * bits)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def run_ber(config: SimConfig, n_workers: int = 1) -> BerEstimate:
    """Simulate the configured link and return the measured BER with a
    95% Wilson confidence interval.

    Results are bit-identical for identical configs regardless of
    n_workers: every block draws from its own (seed, block) generator and
    the accumulation is exact integer addition.
    """
    codebook = None if config.quant.is_full_precision else design_codebook(config.quant.bits)
    parts = _partition(config.n_blocks, n_workers)
    if n_workers <= 1 or len(parts) <= 1:
        counts = [_ber_blocks(config, codebook, p) for p in parts]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            counts = list(
                pool.map(_ber_blocks, *zip(*((config, codebook, p) for p in parts)))
            )
    errors = sum(c[0] for c in counts)
    bits = sum(c[1] for c in counts)
    if bits == 0:
        raise ValueError("simulation produced zero bits")
    ci_low, ci_high = _wilson_interval(errors, bits)
    return BerEstimate(
        ber=errors / bits,
        ci_low=ci_low,
        ci_high=ci_high,
        bit_errors=errors,
        bits_simulated=bits,
    )


def run_estimation_error(config: SimConfig, n_workers: int = 1) -> EstimationErrorStats:
    """Empirical per-entry channel-estimation error variance.

    Averages |H - H_est|^2 over all entries and blocks; the standard error
    comes from the spread of per-block means.
    """
    if config.csi_mode is not CsiMode.ESTIMATED:
        raise ValueError("estimation error requires csi_mode=ESTIMATED")
    codebook = None if config.quant.is_full_precision else design_codebook(config.quant.bits)
    parts = _partition(config.n_blocks, n_workers)
    if n_workers <= 1 or len(parts) <= 1:
        chunks = [_est_error_blocks(config, codebook, p) for p in parts]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            chunks = list(
                pool.map(_est_error_blocks, *zip(*((config, codebook, p) for p in parts)))
            )
    per_block = np.concatenate([np.asarray(c) for c in chunks])
    n_entries = config.n_blocks * config.params.n_antennas * config.params.n_users
    stderr = (
        float(np.std(per_block, ddof=1) / math.sqrt(len(per_block)))
        if len(per_block) > 1
        else math.inf
    )
    return EstimationErrorStats(
        value=float(np.mean(per_block)),
        stderr=stderr,
        n_blocks=config.n_blocks,
        n_entries=n_entries,
    )


def blocks_for_target(
    params: LinkParameters,
    target_ber: float,
    symbols_per_block: int = 500,
    min_errors: int = 100,
) -> int:
    """Blocks needed so the expected error count at target_ber is min_errors."""
    if not 0 < target_ber < 0.5:
        raise ValueError(f"target_ber must be in (0, 0.5), got {target_ber}")
    mapper_bits = 2 * int(math.log2(math.isqrt(params.mod_order)))
    bits_per_block = mapper_bits * params.n_users * symbols_per_block
    return max(1, math.ceil(min_errors / (target_ber * bits_per_block)))
