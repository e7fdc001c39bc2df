"""Gray-QAM mapper: energy, labeling, demapping, AWGN consistency."""

import math

import numpy as np
import pytest

from qmimo import GrayQamMapper, awgn_mqam_ber


@pytest.mark.parametrize("mod", [4, 16, 64, 256])
class TestConstellation:
    def test_unit_energy(self, mod):
        mapper = GrayQamMapper(mod)
        assert np.mean(np.abs(mapper.constellation) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_gray_adjacency_per_rail(self, mod):
        mapper = GrayQamMapper(mod)
        g = mapper._gray_of_level
        for a, b in zip(g[:-1], g[1:]):
            assert bin(int(a) ^ int(b)).count("1") == 1

    def test_round_trip_all_labels(self, mod):
        mapper = GrayQamMapper(mod)
        labels = np.arange(mod)
        assert np.array_equal(mapper.demodulate(mapper.modulate(labels)), labels)

    def test_small_noise_keeps_labels(self, mod):
        mapper = GrayQamMapper(mod)
        rng = np.random.default_rng(mod)
        labels = rng.integers(0, mod, 512)
        # perturb by a tenth of half the rail spacing
        delta = 0.1 / mapper.rail_scale
        noisy = mapper.modulate(labels) + delta * (1 + 1j)
        assert np.array_equal(mapper.demodulate(noisy), labels)


class TestBitErrorCounting:
    def test_label_xor_popcount(self):
        mapper = GrayQamMapper(16)
        sent = np.array([0b0000, 0b1010, 0b1111])
        got = np.array([0b0001, 0b1010, 0b0000])
        assert mapper.count_bit_errors(sent, got) == 1 + 0 + 4

    def test_level_path_matches_label_path(self):
        mapper = GrayQamMapper(64)
        rng = np.random.default_rng(9)
        si = rng.integers(0, mapper.rail_size, 300)
        sq = rng.integers(0, mapper.rail_size, 300)
        received = mapper.symbols_from_levels(si, sq) + 0.08 * (
            rng.standard_normal(300) + 1j * rng.standard_normal(300)
        )
        kr = mapper.bits_per_symbol // 2
        sent_labels = (mapper._gray_of_level[si] << kr) | mapper._gray_of_level[sq]
        by_labels = mapper.count_bit_errors(sent_labels, mapper.demodulate(received))
        by_levels = mapper.count_bit_errors_levels(si, sq, received)
        assert by_levels == by_labels

    def test_invalid_labels_rejected(self):
        mapper = GrayQamMapper(16)
        with pytest.raises(ValueError):
            mapper.modulate(np.array([16]))
        with pytest.raises(ValueError):
            GrayQamMapper(8)


class TestAwgnConsistency:
    @pytest.mark.parametrize("mod,gamma", [(4, 4.0), (16, 9.0), (64, 30.0)])
    def test_mc_ber_matches_formula(self, mod, gamma):
        mapper = GrayQamMapper(mod)
        rng = np.random.default_rng(42 + mod)
        n = 250_000
        labels = rng.integers(0, mod, n)
        sent = mapper.modulate(labels)
        noise = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(0.5 / gamma)
        errors = mapper.count_bit_errors(labels, mapper.demodulate(sent + noise))
        bits = n * mapper.bits_per_symbol
        expected = awgn_mqam_ber(gamma, mod)
        se = math.sqrt(expected * (1 - expected) / bits)
        assert abs(errors / bits - expected) < 3.5 * se
