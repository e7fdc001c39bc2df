"""Design-scenario solvers: feasibility searches and the power model."""

import math

import pytest

from qmimo import (
    INFEASIBLE,
    PowerModel,
    QuantizerSpec,
    ebn0_to_pu,
    frontier_tau_power,
    is_feasible,
    max_users,
    min_antennas,
    power_optimal_resolution,
    required_ebn0,
    total_power,
)
from qmimo.solvers import _ber_at


class TestRequiredEbn0:
    def test_full_precision_reference(self):
        e = required_ebn0(256, 20, 20.0, 16, QuantizerSpec.full_precision(), 1e-3)
        assert e == pytest.approx(-12.9, abs=0.1)

    def test_meets_target_on_reevaluation(self):
        quant = QuantizerSpec.from_bits(3)
        e = required_ebn0(256, 20, 50.0, 16, quant, 1e-3)
        ber = _ber_at(e, 256, 20, 50.0, 16, quant, False)
        assert ber == pytest.approx(1e-3, rel=0.02)

    def test_one_bit_16qam_unreachable(self):
        e = required_ebn0(256, 20, 40.0, 16, QuantizerSpec.from_bits(1), 1e-2)
        assert e == INFEASIBLE

    def test_full_sum_close_to_two_term(self):
        quant = QuantizerSpec.from_bits(4)
        a = required_ebn0(128, 10, 20.0, 16, quant, 1e-3)
        b = required_ebn0(128, 10, 20.0, 16, quant, 1e-3, full_sum=True)
        assert a == pytest.approx(b, abs=0.05)

    def test_target_validation(self):
        with pytest.raises(ValueError):
            required_ebn0(64, 8, 16.0, 16, QuantizerSpec.full_precision(), 0.7)


class TestFrontier:
    def test_scenario_point(self):
        pts = frontier_tau_power(256, 40, 16, QuantizerSpec.from_bits(3), 1e-4, [60.0])
        assert pts[0].feasible
        assert pts[0].ebn0_db == pytest.approx(-5.5, abs=0.2)

    def test_monotone_in_tau_and_bits(self):
        taus = [40.0, 60.0, 80.0, 120.0]
        by_bits = {}
        for bits in (3, 4, 5):
            pts = frontier_tau_power(256, 40, 16, QuantizerSpec.from_bits(bits), 1e-4, taus)
            values = [p.ebn0_db for p in pts if p.feasible]
            assert all(a >= b for a, b in zip(values, values[1:]))
            by_bits[bits] = values
        for tau_idx in range(len(taus)):
            assert by_bits[3][tau_idx] >= by_bits[4][tau_idx] >= by_bits[5][tau_idx]

    def test_two_bit_all_infeasible(self):
        pts = frontier_tau_power(
            256, 40, 16, QuantizerSpec.from_bits(2), 1e-4, [40.0, 100.0, 400.0]
        )
        assert all(not p.feasible for p in pts)

    def test_rejects_tau_below_users(self):
        with pytest.raises(ValueError):
            frontier_tau_power(64, 20, 16, QuantizerSpec.from_bits(3), 1e-3, [10.0])


class TestMinAntennas:
    def test_bracket_is_tight(self):
        quant = QuantizerSpec.from_bits(3)
        n_min = min_antennas(20, quant, 30.0, 16, 1e-3, -8.0)
        assert is_feasible(n_min)
        assert _ber_at(-8.0, int(n_min), 20, 30.0, 16, quant, False) <= 1e-3
        assert _ber_at(-8.0, int(n_min) - 1, 20, 30.0, 16, quant, False) > 1e-3

    def test_full_precision_needs_fewest(self):
        kwargs = dict(pilot_len=30.0, mod_order=16, target_ber=1e-3, ebn0_db=-8.0)
        n_full = min_antennas(20, QuantizerSpec.full_precision(), **kwargs)
        for bits in (2, 3, 4, 6):
            assert n_full < min_antennas(20, QuantizerSpec.from_bits(bits), **kwargs)

    def test_one_bit_needs_many_more_antennas(self):
        # 1-bit 16-QAM is power-limited, but enough diversity still gets there
        got = min_antennas(20, QuantizerSpec.from_bits(1), 30.0, 16, 1e-3, -8.0, n_cap=4096)
        assert is_feasible(got)
        assert got > 1000

    def test_cap_returns_infeasible(self):
        got = min_antennas(20, QuantizerSpec.from_bits(1), 30.0, 16, 1e-3, -8.0, n_cap=1000)
        assert got == INFEASIBLE


class TestMaxUsers:
    def test_bracket_is_tight(self):
        quant = QuantizerSpec.from_bits(3)
        k_max = max_users(256, quant, 40.0, 16, 1e-4, -10.7)
        assert 0 < k_max < 40
        assert _ber_at(-10.7, 256, k_max, 40.0, 16, quant, False) <= 1e-4
        assert _ber_at(-10.7, 256, k_max + 1, 40.0, 16, quant, False) > 1e-4

    def test_zero_when_even_one_user_fails(self):
        assert max_users(64, QuantizerSpec.from_bits(1), 64.0, 256, 1e-4, -20.0) == 0

    def test_capped_by_pilots_and_antennas(self):
        got = max_users(256, QuantizerSpec.full_precision(), 8.0, 4, 1e-3, 10.0)
        assert got == 8


class TestPowerModel:
    def test_adc_power_values(self):
        model = PowerModel(fom_fj=1432.1, sample_rate_hz=100e6)
        assert model.p_adc_w(1) == pytest.approx(0.28642e-3, rel=1e-9)
        assert model.p_adc_w(3) == pytest.approx(1.14568e-3, rel=1e-9)

    def test_strictly_increasing_in_bits(self):
        model = PowerModel(fom_fj=1432.1, sample_rate_hz=100e6)
        powers = [model.p_adc_w(b) for b in range(1, 9)]
        assert all(a < b for a, b in zip(powers, powers[1:]))

    def test_total_power_terms(self):
        model = PowerModel(
            fom_fj=1000.0, sample_rate_hz=1e8, rf_per_antenna_w=0.02, static_w=1.5, noise_ref_w=1e-3
        )
        got = total_power(model, n_antennas=10, n_users=4, pu_linear=2.0, bits=2)
        expected = 4 * 2.0 * 1e-3 + 10 * (2 * model.p_adc_w(2) + 0.02) + 1.5
        assert got == pytest.approx(expected, rel=1e-12)

    def test_zero_antennas_degenerate(self):
        model = PowerModel(1432.1, 100e6, 0.1, 2.0, 1e-3)
        assert total_power(model, 0, 0, 1.0, 3) == pytest.approx(2.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            PowerModel(-1.0, 1e8)
        model = PowerModel(1432.1, 100e6)
        with pytest.raises(ValueError):
            model.p_adc_w(0)


class TestPowerSearch:
    _grid = list(range(60, 1001, 20))

    def _search(self, rf=0.0, static=0.0, noise_ref=1e-2, bits=(1, 2)):
        model = PowerModel(1432.1, 100e6, rf_per_antenna_w=rf, static_w=static, noise_ref_w=noise_ref)
        return power_optimal_resolution(model, 20, 40.0, 4, 1e-3, list(bits), self._grid)

    def test_crossings_exactly_invariant_to_fixed_terms(self):
        a = self._search(rf=0.0, static=0.0)
        b = self._search(rf=0.5, static=10.0)
        assert [c.n_antennas for c in a.crossings] == [c.n_antennas for c in b.crossings]

    def test_crossing_unique_in_range(self):
        result = self._search()
        pairs = [(c.bits_low, c.bits_high) for c in result.crossings]
        assert pairs.count((1, 2)) == 1
        n = result.crossings[0].n_antennas
        assert 50 <= n <= 1000

    def test_adc_dominates_when_transmit_power_free(self):
        # with transmit and fixed power zeroed, at any antenna count the
        # cheapest feasible resolution is the lowest one
        model = PowerModel(1432.1, 100e6, rf_per_antenna_w=0.0, static_w=0.0, noise_ref_w=0.0)
        result = power_optimal_resolution(model, 20, 40.0, 4, 1e-3, [1, 2, 3], self._grid)
        for idx, n in enumerate(p.n_antennas for p in result.curves[1]):
            feasible = [
                (bits, result.curves[bits][idx])
                for bits in (1, 2, 3)
                if result.curves[bits][idx].feasible
            ]
            if len(feasible) > 1:
                cheapest_bits = min(feasible, key=lambda t: t[1].p_total_w)[0]
                assert cheapest_bits == feasible[0][0]
        # and the returned optimum agrees with brute force over the curves
        brute = min(
            (pt.p_total_w, bits, pt.n_antennas)
            for bits, pts in result.curves.items()
            for pt in pts
            if pt.feasible
        )
        assert (result.best_p_total_w, result.best_bits, result.best_n) == brute

    def test_infeasible_points_flagged(self):
        model = PowerModel(1432.1, 100e6)
        result = power_optimal_resolution(model, 20, 40.0, 16, 1e-3, [1], [64, 256])
        assert all(not p.feasible for p in result.curves[1])
        assert result.best_bits is None
