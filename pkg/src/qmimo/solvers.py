"""Design-scenario solvers built on the closed-form BER.

Feasibility searches run against the two-term BER truncation (the fastest
expression that tracks the full sum closely); a flag switches any solver to
the full double sum for sensitivity checks. Power requirements are searched
by bisection on Eb/N0 over [-60, +60] dB; antenna and user counts by exact
integer bracketing, exploiting the monotonicity of BER in each argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .analytic import (
    LinkParameters,
    QuantizerSpec,
    Regime,
    ebn0_to_pu,
)
from .ber import closed_form_from_gamma0, two_term_from_gamma0
from .errors import INFEASIBLE, is_feasible
from . import analytic

_EBN0_LO = -60.0
_EBN0_HI = 60.0
_EBN0_TOL = 1e-4  # dB; far below the 0.01 dB contract


@dataclass(frozen=True)
class PowerModel:
    """Receiver power model: ADC energy plus fixed RF and static terms.

    fom_fj is the ADC figure of merit in femtojoules per conversion step;
    a b-bit converter burns fom * f_s * 2^b watts. noise_ref_w maps the
    dimensionless linear per-user SNR pu onto transmit watts (default:
    1 mW per unit pu).
    """

    fom_fj: float
    sample_rate_hz: float
    rf_per_antenna_w: float = 0.0
    static_w: float = 0.0
    noise_ref_w: float = 1e-3

    def __post_init__(self):
        for name in ("fom_fj", "sample_rate_hz", "rf_per_antenna_w", "static_w", "noise_ref_w"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def p_adc_w(self, bits: int) -> float:
        """Power of one b-bit ADC in watts."""
        if not isinstance(bits, int) or isinstance(bits, bool) or bits < 1:
            raise ValueError(f"ADC power needs an integer bit resolution, got {bits!r}")
        return self.fom_fj * 1e-15 * self.sample_rate_hz * 2.0**bits


@dataclass(frozen=True)
class FeasibilityPoint:
    pilot_len: float
    ebn0_db: float
    feasible: bool


@dataclass(frozen=True)
class PowerCurvePoint:
    n_antennas: int
    ebn0_db: float
    pu: float
    p_total_w: float
    feasible: bool


@dataclass(frozen=True)
class CurveCrossing:
    bits_low: int
    bits_high: int
    n_antennas: float


@dataclass(frozen=True)
class PowerSearchResult:
    curves: dict = field(default_factory=dict)
    best_bits: int | None = None
    best_n: int | None = None
    best_p_total_w: float = INFEASIBLE
    crossings: list = field(default_factory=list)


def _ber_at(
    ebn0_db: float,
    n_antennas: int,
    n_users: int,
    pilot_len: float,
    mod_order: int,
    quant: QuantizerSpec,
    full_sum: bool,
) -> float:
    params = LinkParameters(
        n_antennas=n_antennas,
        n_users=n_users,
        pilot_len=pilot_len,
        tx_power=ebn0_to_pu(ebn0_db, mod_order),
        mod_order=mod_order,
    )
    model = analytic.gamma0(params, quant, Regime.IMPERFECT_CSI_QUANTIZED)
    m = model.dof // 2
    if full_sum:
        return closed_form_from_gamma0(model.gamma0, mod_order, m)[0]
    return two_term_from_gamma0(model.gamma0, mod_order, m)


def required_ebn0(
    n_antennas: int,
    n_users: int,
    pilot_len: float,
    mod_order: int,
    quant: QuantizerSpec,
    target_ber: float,
    full_sum: bool = False,
) -> float:
    """Smallest Eb/N0 (dB) meeting the target BER with estimated CSI.

    Returns INFEASIBLE when the quantization ceiling keeps the BER above
    target at any power in [-60, +60] dB.
    """
    if not 0.0 < target_ber < 0.5:
        raise ValueError(f"target_ber must be in (0, 0.5), got {target_ber}")

    def ber(e):
        return _ber_at(e, n_antennas, n_users, pilot_len, mod_order, quant, full_sum)

    if ber(_EBN0_HI) > target_ber:
        return INFEASIBLE
    lo, hi = _EBN0_LO, _EBN0_HI
    if ber(lo) <= target_ber:
        return lo
    while hi - lo > _EBN0_TOL:
        mid = 0.5 * (lo + hi)
        if ber(mid) > target_ber:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def frontier_tau_power(
    n_antennas: int,
    n_users: int,
    mod_order: int,
    quant: QuantizerSpec,
    target_ber: float,
    tau_grid,
    full_sum: bool = False,
):
    """Required Eb/N0 along a pilot-length grid, marking infeasible points."""
    points = []
    for tau in tau_grid:
        if tau < n_users:
            raise ValueError(f"pilot length {tau} below n_users {n_users}")
        e = required_ebn0(n_antennas, n_users, tau, mod_order, quant, target_ber, full_sum)
        points.append(FeasibilityPoint(pilot_len=tau, ebn0_db=e, feasible=is_feasible(e)))
    return points


def min_antennas(
    n_users: int,
    quant: QuantizerSpec,
    pilot_len: float,
    mod_order: int,
    target_ber: float,
    ebn0_db: float,
    n_cap: int = 4096,
    full_sum: bool = False,
) -> float:
    """Smallest antenna count meeting the target BER, or INFEASIBLE.

    BER decreases strictly in N, so an exponential bracket from N = K
    followed by binary search finds the exact integer.
    """

    def ok(n):
        return (
            _ber_at(ebn0_db, n, n_users, pilot_len, mod_order, quant, full_sum) <= target_ber
        )

    if ok(n_users):
        return n_users
    if not ok(n_cap):
        return INFEASIBLE
    lo, hi = n_users, 2 * n_users
    while hi < n_cap and not ok(hi):
        lo, hi = hi, min(2 * hi, n_cap)
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def max_users(
    n_antennas: int,
    quant: QuantizerSpec,
    pilot_len: float,
    mod_order: int,
    target_ber: float,
    ebn0_db: float,
    full_sum: bool = False,
) -> int:
    """Largest user count meeting the target BER; 0 if even one user fails.

    BER increases strictly in K, so binary search over [1, min(N, tau)].
    """
    hi_cap = min(n_antennas, int(pilot_len))
    if hi_cap < 1:
        return 0

    def ok(k):
        return (
            _ber_at(ebn0_db, n_antennas, k, pilot_len, mod_order, quant, full_sum)
            <= target_ber
        )

    if not ok(1):
        return 0
    if ok(hi_cap):
        return hi_cap
    lo, hi = 1, hi_cap
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def total_power(
    power_model: PowerModel,
    n_antennas: int,
    n_users: int,
    pu_linear: float,
    bits: int,
) -> float:
    """Total consumption K*pu*noise_ref + N*(2*P_ADC + P_RF) + P_other, watts."""
    return (
        n_users * pu_linear * power_model.noise_ref_w
        + n_antennas * (2.0 * power_model.p_adc_w(bits) + power_model.rf_per_antenna_w)
        + power_model.static_w
    )


def power_optimal_resolution(
    power_model: PowerModel,
    n_users: int,
    pilot_len: float,
    mod_order: int,
    target_ber: float,
    bit_range,
    n_range,
    full_sum: bool = False,
) -> PowerSearchResult:
    """Total-power curves over antenna count for each ADC resolution.

    For every (bits, N) the required transmit power comes from
    required_ebn0; infeasible points are flagged and excluded from the
    optimum and from crossing detection. Crossings between adjacent
    resolutions are sign changes of the power difference, located by
    linear interpolation; they do not depend on rf_per_antenna_w or
    static_w, which cancel at equal N.
    """
    bit_list = sorted(bit_range)
    n_list = sorted(n_range)
    curves = {}
    best = (INFEASIBLE, None, None)
    for bits in bit_list:
        quant = QuantizerSpec.from_bits(bits)
        pts = []
        for n in n_list:
            if n < n_users:
                continue
            e = required_ebn0(n, n_users, pilot_len, mod_order, quant, target_ber, full_sum)
            if is_feasible(e):
                pu = ebn0_to_pu(e, mod_order)
                p = total_power(power_model, n, n_users, pu, bits)
                pts.append(PowerCurvePoint(n, e, pu, p, True))
                if p < best[0]:
                    best = (p, bits, n)
            else:
                pts.append(PowerCurvePoint(n, INFEASIBLE, INFEASIBLE, INFEASIBLE, False))
        curves[bits] = pts
    crossings = []
    adc_gap = {
        (lo, hi): 2.0 * (power_model.p_adc_w(lo) - power_model.p_adc_w(hi))
        for lo, hi in zip(bit_list[:-1], bit_list[1:])
    }
    for b_lo, b_hi in zip(bit_list[:-1], bit_list[1:]):
        by_n_lo = {p.n_antennas: p for p in curves[b_lo] if p.feasible}
        by_n_hi = {p.n_antennas: p for p in curves[b_hi] if p.feasible}
        common = sorted(set(by_n_lo) & set(by_n_hi))
        prev = None
        for n in common:
            # rf_per_antenna_w and static_w cancel at equal N; computing the
            # difference from the surviving terms keeps crossings exactly
            # independent of them
            diff = (
                n_users * power_model.noise_ref_w * (by_n_lo[n].pu - by_n_hi[n].pu)
                + n * adc_gap[(b_lo, b_hi)]
            )
            if prev is not None and diff != 0.0 and math.copysign(1, diff) != math.copysign(1, prev[1]):
                n0, d0 = prev
                crossings.append(
                    CurveCrossing(b_lo, b_hi, n0 + (n - n0) * d0 / (d0 - diff))
                )
            prev = (n, diff)
    return PowerSearchResult(
        curves=curves,
        best_bits=best[1],
        best_n=best[2],
        best_p_total_w=best[0],
        crossings=crossings,
    )
