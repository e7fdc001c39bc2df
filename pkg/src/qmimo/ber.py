"""Bit-error-ratio of uncoded square M-QAM with ZF detection in Rayleigh
block fading, under quantization and channel-estimation impairments.

The post-detection SINR of each user is gamma0 * X where X follows a
chi-square law with 2(N-K+1) degrees of freedom (mean N-K+1). Averaging
the exact AWGN Gray-QAM bit-error expression over X gives a closed form
built from terms B(mu_i); a two-term truncation keeps only the dominant
i = 0, 1 contributions. An adaptive-quadrature evaluation of the same
average serves as an independent numerical oracle.

Numerical notes: (1-mu)/2 is evaluated in the rationalized form
1/((2+c) + sqrt(c(2+c))) so no cancellation occurs as mu -> 1, and the
binomial sum in B runs in log space so diversity orders in the thousands
neither overflow nor lose the tiny tail values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import erfc, gammaln, logsumexp

from .analytic import LinkParameters, QuantizerSpec, Regime, gamma0
from .errors import NumericFailure

__all__ = [
    "BerTerms",
    "awgn_mqam_ber",
    "b_factor",
    "ber_closed_form",
    "ber_two_term",
    "ber_numeric_oracle",
    "closed_form_from_gamma0",
    "two_term_from_gamma0",
    "oracle_from_gamma0",
]


@dataclass(frozen=True)
class BerTerms:
    """Expansion of the closed-form BER.

    coefficients: F(k, i) weights flattened over k = 1..log2(sqrt(M)) and
    i = 0..(1 - 2^-k)sqrt(M) - 1, in that order. mus / b_values: mu_i and
    B(mu_i) for each distinct i (i = 0 .. sqrt(M) - 2).
    """

    coefficients: list
    mus: list
    b_values: list


def _rail_size(mod_order: int) -> int:
    r = int(round(math.sqrt(mod_order)))
    if r * r != mod_order or r < 2 or (r & (r - 1)) != 0:
        raise ValueError(f"mod_order must be a square power-of-two QAM order, got {mod_order}")
    return r


def _term_indices(mod_order: int):
    """(k, i) index pairs of the exact AWGN Gray-QAM expansion."""
    r = _rail_size(mod_order)
    pairs = []
    for k in range(1, int(math.log2(r)) + 1):
        for i in range(r - (r >> k)):
            pairs.append((k, i))
    return pairs


def _f_coefficient(k: int, i: int, mod_order: int) -> float:
    """Gray-weighting coefficient F(k, i), computed in exact integer math."""
    r = _rail_size(mod_order)
    t = i << (k - 1)
    sign = -1.0 if (t // r) % 2 else 1.0
    half_floor = (2 * t + r) // (2 * r)
    return 2.0 * sign * (2.0 ** (k - 1) - half_floor) / (r * math.log2(r))


def _c_of(i: int, g0: float, mod_order: int) -> float:
    return 3.0 * (2 * i + 1) ** 2 * g0 / (mod_order - 1)


def _log_half_one_minus_mu(c: float) -> float:
    # (1-mu)/2 = 1/((2+c) + sqrt(c(2+c))) for mu = sqrt(c/(2+c))
    return -math.log((2.0 + c) + math.sqrt(c * (2.0 + c)))


def _log_half_one_plus_mu(c: float) -> float:
    s = math.sqrt(c * (2.0 + c))
    return math.log((2.0 + c) + s) - math.log(2.0 * (2.0 + c))


def _log_b_from_c(c: float, diversity: int) -> float:
    """log B(mu) for mu = sqrt(c/(2+c)) and N-K+1 = diversity branches."""
    if math.isinf(c):
        return -math.inf
    m = diversity
    j = np.arange(m)
    log_binom = gammaln(m + j) - gammaln(j + 1) - gammaln(m)
    return m * _log_half_one_minus_mu(c) + float(
        logsumexp(log_binom + j * _log_half_one_plus_mu(c))
    )


def b_factor(mu: float, diversity: int) -> float:
    """B(mu) = ((1-mu)/2)^m * sum_j C(m-1+j, j) ((1+mu)/2)^j for m branches.

    Direct evaluation from mu in (0, 1); adequate away from mu ~ 1 where
    the closed-form path switches to the cancellation-free c-based form.
    """
    if not 0.0 <= mu < 1.0:
        raise ValueError(f"mu must lie in [0, 1), got {mu}")
    m = diversity
    j = np.arange(m)
    log_binom = gammaln(m + j) - gammaln(j + 1) - gammaln(m)
    log_lo = math.log1p(-mu) - math.log(2.0)
    log_hi = math.log1p(mu) - math.log(2.0)
    return float(np.exp(m * log_lo + logsumexp(log_binom + j * log_hi)))


def awgn_mqam_ber(gamma: float, mod_order: int) -> float:
    """Exact bit-error ratio of Gray-coded square M-QAM on an AWGN channel."""
    if gamma < 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    total = 0.0
    for k, i in _term_indices(mod_order):
        arg = math.sqrt(_c_of(i, gamma, mod_order))
        total += _f_coefficient(k, i, mod_order) * 0.5 * erfc(arg / math.sqrt(2.0))
    return total


def closed_form_from_gamma0(g0: float, mod_order: int, diversity: int):
    """Full double-sum fading-averaged BER; returns (ber, BerTerms)."""
    if diversity < 1:
        raise ValueError(f"diversity must be >= 1, got {diversity}")
    if g0 < 0:
        raise ValueError(f"gamma0 must be nonnegative, got {g0}")
    r = _rail_size(mod_order)
    b_cache = {}
    mu_cache = {}
    for i in range(r - 1):
        c = _c_of(i, g0, mod_order)
        mu_cache[i] = math.sqrt(c / (2.0 + c)) if math.isfinite(c) else 1.0
        b_cache[i] = math.exp(_log_b_from_c(c, diversity))
    coeffs = []
    total = 0.0
    for k, i in _term_indices(mod_order):
        f = _f_coefficient(k, i, mod_order)
        coeffs.append(f)
        total += f * b_cache[i]
    n_distinct = max(i for _, i in _term_indices(mod_order)) + 1
    terms = BerTerms(
        coefficients=coeffs,
        mus=[mu_cache[i] for i in range(n_distinct)],
        b_values=[b_cache[i] for i in range(n_distinct)],
    )
    return total, terms


def two_term_from_gamma0(g0: float, mod_order: int, diversity: int) -> float:
    """Two dominant terms (i = 0, 1) of the fading-averaged BER."""
    if diversity < 1:
        raise ValueError(f"diversity must be >= 1, got {diversity}")
    if g0 < 0:
        raise ValueError(f"gamma0 must be nonnegative, got {g0}")
    r = _rail_size(mod_order)
    scale = 2.0 / (r * math.log2(r))
    out = scale * (r - 1) * math.exp(_log_b_from_c(_c_of(0, g0, mod_order), diversity))
    if r > 2:
        out += scale * (r - 2) * math.exp(_log_b_from_c(_c_of(1, g0, mod_order), diversity))
    return out


def oracle_from_gamma0(g0: float, mod_order: int, diversity: int) -> float:
    """Fading-averaged BER by adaptive quadrature of the AWGN expression
    against the chi-square density (mean = diversity). Independent of the
    closed form; used as its test oracle."""
    if diversity < 1:
        raise ValueError(f"diversity must be >= 1, got {diversity}")
    if g0 < 0:
        raise ValueError(f"gamma0 must be nonnegative, got {g0}")
    m = diversity
    lgm = gammaln(m)
    pairs = _term_indices(mod_order)

    def integrand(x: float) -> float:
        if x <= 0.0:
            return 0.0
        log_pdf = (m - 1) * math.log(x) - x - lgm if m > 1 else -x
        pdf = math.exp(log_pdf)
        if pdf == 0.0:
            return 0.0
        return awgn_mqam_ber(g0 * x, mod_order) * pdf

    hi = m + 40.0 * math.sqrt(m) + 40.0
    # Mass concentrates near m at low SNR and near m/(1 + c/2) at high SNR.
    guides = {float(m)}
    for _, i in (pairs[0], pairs[-1]):
        c = _c_of(i, g0, mod_order)
        if math.isfinite(c):
            guides.add(m / (1.0 + 0.5 * c))
    points = sorted(p for p in guides if 0.0 < p < hi)
    value, abserr = integrate.quad(
        integrand, 0.0, hi, points=points or None, epsabs=1e-300, epsrel=1e-12, limit=500
    )
    if value < 0 or (value > 0 and abserr > 1e-8 * value):
        raise NumericFailure(
            f"BER quadrature did not converge: value={value!r}, abserr={abserr!r}, "
            f"gamma0={g0!r}, mod_order={mod_order}, diversity={diversity}"
        )
    return value


def _resolve_gamma0(params: LinkParameters, quant: QuantizerSpec, regime: Regime):
    model = gamma0(params, quant, regime)
    if not math.isfinite(model.gamma0):
        raise ValueError(f"gamma0 must be finite for BER evaluation, got {model.gamma0}")
    return model


def ber_closed_form(params: LinkParameters, quant: QuantizerSpec, regime: Regime):
    """Closed-form BER at this operating point; returns (ber, BerTerms)."""
    model = _resolve_gamma0(params, quant, regime)
    return closed_form_from_gamma0(model.gamma0, params.mod_order, model.dof // 2)


def ber_two_term(params: LinkParameters, quant: QuantizerSpec, regime: Regime) -> float:
    """Two-term truncation of the closed-form BER at this operating point."""
    model = _resolve_gamma0(params, quant, regime)
    return two_term_from_gamma0(model.gamma0, params.mod_order, model.dof // 2)


def ber_numeric_oracle(params: LinkParameters, quant: QuantizerSpec, regime: Regime) -> float:
    """Quadrature evaluation of the BER at this operating point."""
    model = _resolve_gamma0(params, quant, regime)
    return oracle_from_gamma0(model.gamma0, params.mod_order, model.dof // 2)
