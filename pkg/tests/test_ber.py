"""BER closed form vs the quadrature oracle, truncation, and properties."""

import math

import numpy as np
import pytest

from qmimo import (
    LinkParameters,
    QuantizerSpec,
    Regime,
    awgn_mqam_ber,
    ber_closed_form,
    ber_numeric_oracle,
    ber_two_term,
)
from qmimo.ber import (
    b_factor,
    closed_form_from_gamma0,
    oracle_from_gamma0,
    two_term_from_gamma0,
    _f_coefficient,
    _term_indices,
)


class TestAwgnReference:
    def test_zero_snr_is_half(self):
        for m in (4, 16, 64, 256):
            assert awgn_mqam_ber(0.0, m) == pytest.approx(0.5, rel=1e-12)

    def test_qpsk_known_value(self):
        # QPSK per-bit error Q(sqrt(gamma)) at gamma = 2
        from scipy.special import erfc

        assert awgn_mqam_ber(2.0, 4) == pytest.approx(0.5 * erfc(1.0), rel=1e-12)

    def test_coefficients_sum_to_one(self):
        for m in (4, 16, 64, 256):
            total = sum(_f_coefficient(k, i, m) for k, i in _term_indices(m))
            assert total == pytest.approx(1.0, rel=1e-12)


class TestClosedForm:
    def test_qpsk_single_term(self):
        ber, terms = closed_form_from_gamma0(0.8, 4, 12)
        assert terms.coefficients == [1.0]
        assert len(terms.mus) == 1
        assert ber == pytest.approx(terms.b_values[0], rel=1e-12)

    def test_single_branch_matches_rayleigh_formula(self):
        # one diversity branch: BER = (1 - sqrt(g/(2+g))) / 2
        for g0 in (0.3, 1.0, 5.0):
            ber, _ = closed_form_from_gamma0(g0, 4, 1)
            assert ber == pytest.approx(0.5 * (1 - math.sqrt(g0 / (2 + g0))), rel=1e-12)
        ber, _ = closed_form_from_gamma0(1.0, 4, 1)
        assert ber == pytest.approx(0.2113248654, abs=1e-10)

    def test_zero_gamma0_is_half(self):
        for m in (4, 16, 64):
            ber, _ = closed_form_from_gamma0(0.0, m, 37)
            assert ber == pytest.approx(0.5, rel=1e-12)

    def test_terms_in_range(self):
        _, terms = closed_form_from_gamma0(0.7, 64, 45)
        assert all(0.0 < mu < 1.0 for mu in terms.mus)
        assert all(0.0 < b < 1.0 for b in terms.b_values)
        assert len(terms.coefficients) == len(_term_indices(64))

    def test_generic_mu_reduces_to_estimated_csi_form(self):
        # the generic sqrt(c/(2+c)) with the estimated-CSI quantized gamma0
        # equals the expanded expression written directly in link parameters
        from qmimo import l_factor

        n, k, tau, pu, mod = 128, 12, 24.0, 0.8, 64
        quant = QuantizerSpec.from_bits(2)
        params = LinkParameters(n, k, tau, pu, mod)
        _, terms = ber_closed_form(params, quant, Regime.IMPERFECT_CSI_QUANTIZED)
        lf = l_factor(quant.alpha, pu, k)
        for i, mu in enumerate(terms.mus):
            num = 3 * (2 * i + 1) ** 2 * pu * pu * tau
            den = 2 * (mod - 1) * lf * (lf + (k + tau) * pu) + num
            assert mu == pytest.approx(math.sqrt(num / den), rel=1e-14)

    def test_high_snr_stays_positive_and_tiny(self):
        ber, _ = closed_form_from_gamma0(1e8, 4, 1)
        assert 0.0 < ber < 1e-8
        ber2, _ = closed_form_from_gamma0(1e8, 16, 300)
        assert ber2 >= 0.0 and ber2 < 1e-100

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            closed_form_from_gamma0(1.0, 16, 0)
        with pytest.raises(ValueError):
            closed_form_from_gamma0(-1.0, 16, 5)
        with pytest.raises(ValueError):
            closed_form_from_gamma0(1.0, 8, 5)


class TestMonotonicity:
    def test_mu_increases_with_gamma0(self):
        mus = [closed_form_from_gamma0(g, 16, 10)[1].mus[0] for g in (0.1, 0.5, 2.0, 10.0)]
        assert all(a < b for a, b in zip(mus, mus[1:]))

    def test_b_factor_decreases_with_mu(self):
        values = [b_factor(mu, 25) for mu in (0.05, 0.2, 0.5, 0.9, 0.99)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_ber_monotone_in_link_parameters(self):
        base = dict(n_antennas=64, n_users=8, pilot_len=16.0, tx_power=1.0, mod_order=16)
        quant = QuantizerSpec.from_bits(3)
        reg = Regime.IMPERFECT_CSI_QUANTIZED

        def ber(**kw):
            params = LinkParameters(**{**base, **kw})
            return ber_closed_form(params, quant, reg)[0]

        decreasing_n = [ber(n_antennas=n) for n in (16, 32, 64, 128)]
        assert all(a > b for a, b in zip(decreasing_n, decreasing_n[1:]))
        decreasing_tau = [ber(pilot_len=t) for t in (8.0, 16.0, 32.0, 64.0)]
        assert all(a > b for a, b in zip(decreasing_tau, decreasing_tau[1:]))
        decreasing_pu = [ber(tx_power=p) for p in (0.25, 0.5, 1.0, 2.0)]
        assert all(a > b for a, b in zip(decreasing_pu, decreasing_pu[1:]))
        increasing_k = [ber(n_users=k) for k in (2, 4, 8, 12)]
        assert all(a < b for a, b in zip(increasing_k, increasing_k[1:]))
        increasing_m = [ber(mod_order=m) for m in (4, 16, 64, 256)]
        assert all(a < b for a, b in zip(increasing_m, increasing_m[1:]))
        alphas = [
            ber_closed_form(LinkParameters(**base), QuantizerSpec.from_bits(b), reg)[0]
            for b in (1, 2, 3, 4)
        ]
        assert all(a > b for a, b in zip(alphas, alphas[1:]))


class TestTwoTerm:
    def test_qpsk_identical_to_full(self):
        for g0 in (0.05, 0.4, 3.0):
            full, _ = closed_form_from_gamma0(g0, 4, 20)
            assert two_term_from_gamma0(g0, 4, 20) == full

    def test_truncation_close_to_full_sum(self):
        # truncation error shrinks fast as the BER drops into the useful range
        rng = np.random.default_rng(5)
        for _ in range(300):
            m = int(rng.integers(1, 200))
            g0 = float(10 ** rng.uniform(-1.5, 1.0))
            mod = int(rng.choice([16, 64, 256]))
            full, _ = closed_form_from_gamma0(g0, mod, m)
            two = two_term_from_gamma0(g0, mod, m)
            if full < 0.02:
                assert two == pytest.approx(full, rel=1e-5)
            elif full < 0.2:
                assert two == pytest.approx(full, rel=3e-2)

    def test_params_entry_point(self):
        params = LinkParameters(256, 20, 50.0, 0.366, 16)
        quant = QuantizerSpec.from_bits(3)
        got = ber_two_term(params, quant, Regime.IMPERFECT_CSI_QUANTIZED)
        assert 1e-4 < got < 1e-2


class TestOracleEquivalence:
    @pytest.mark.parametrize(
        "mod,m,g0",
        [(4, 1, 1.0), (16, 57, 0.19), (16, 237, 0.2), (64, 10, 3.0), (256, 300, 0.5)],
    )
    def test_matches_closed_form(self, mod, m, g0):
        closed, _ = closed_form_from_gamma0(g0, mod, m)
        oracle = oracle_from_gamma0(g0, mod, m)
        assert oracle == pytest.approx(closed, rel=1e-9)

    def test_huge_gamma0_goes_to_zero(self):
        assert oracle_from_gamma0(1e12, 4, 8) < 1e-15

    def test_params_entry_point(self):
        params = LinkParameters(64, 8, 16.0, 1.5, 16)
        quant = QuantizerSpec.from_bits(2)
        reg = Regime.IMPERFECT_CSI_QUANTIZED
        closed, _ = ber_closed_form(params, quant, reg)
        assert ber_numeric_oracle(params, quant, reg) == pytest.approx(closed, rel=1e-9)
