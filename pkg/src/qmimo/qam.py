"""Gray-coded square QAM mapping with per-rail hard-decision demapping."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _gray(n: np.ndarray) -> np.ndarray:
    return n ^ (n >> 1)


@dataclass
class GrayQamMapper:
    """Square M-QAM constellation with unit average symbol energy.

    Each rail carries log2(sqrt(M)) Gray-labelled bits; a symbol's label is
    the I-rail Gray code in the high bits and the Q-rail Gray code in the
    low bits. Adjacent amplitudes on a rail differ in exactly one bit.
    """

    mod_order: int
    rail_size: int = field(init=False)
    bits_per_symbol: int = field(init=False)
    rail_scale: float = field(init=False)
    amplitudes: np.ndarray = field(init=False)
    constellation: np.ndarray = field(init=False)
    bit_labels: np.ndarray = field(init=False)

    def __post_init__(self):
        r = int(round(math.sqrt(self.mod_order)))
        if r * r != self.mod_order or r < 2 or (r & (r - 1)) != 0:
            raise ValueError(f"mod_order must be square power-of-two QAM, got {self.mod_order}")
        self.rail_size = r
        self.bits_per_symbol = 2 * int(math.log2(r))
        # Per-rail amplitudes +-1, +-3, ... scaled for E|s|^2 = 1.
        self.rail_scale = math.sqrt(2.0 * (self.mod_order - 1) / 3.0)
        self.amplitudes = (2.0 * np.arange(r) - (r - 1)) / self.rail_scale
        gray = _gray(np.arange(r))
        level_of_gray = np.empty(r, dtype=np.int64)
        level_of_gray[gray] = np.arange(r)
        kr = self.bits_per_symbol // 2
        labels = np.arange(self.mod_order)
        li = level_of_gray[labels >> kr]
        lq = level_of_gray[labels & (r - 1)]
        self.constellation = self.amplitudes[li] + 1j * self.amplitudes[lq]
        self.bit_labels = labels
        self._gray_of_level = gray

    def modulate(self, labels) -> np.ndarray:
        """Map integer bit labels in [0, M) to constellation points."""
        labels = np.asarray(labels)
        if np.any((labels < 0) | (labels >= self.mod_order)):
            raise ValueError("labels out of range")
        return self.constellation[labels]

    def symbols_from_levels(self, idx_i, idx_q) -> np.ndarray:
        """Constellation points from per-rail level indices (simulator path)."""
        return self.amplitudes[idx_i] + 1j * self.amplitudes[idx_q]

    def _nearest_levels(self, received):
        r = self.rail_size
        li = np.clip(
            np.round((np.real(received) * self.rail_scale + (r - 1)) / 2.0), 0, r - 1
        ).astype(np.int64)
        lq = np.clip(
            np.round((np.imag(received) * self.rail_scale + (r - 1)) / 2.0), 0, r - 1
        ).astype(np.int64)
        return li, lq

    def demodulate(self, received) -> np.ndarray:
        """Per-rail minimum-distance decision, returned as bit labels."""
        li, lq = self._nearest_levels(np.asarray(received))
        kr = self.bits_per_symbol // 2
        return (self._gray_of_level[li] << kr) | self._gray_of_level[lq]

    def count_bit_errors_levels(self, sent_i, sent_q, received) -> int:
        """Bit errors between sent level indices and received symbols."""
        ri, rq = self._nearest_levels(np.asarray(received))
        g = self._gray_of_level
        diff_i = g[np.asarray(sent_i)] ^ g[ri]
        diff_q = g[np.asarray(sent_q)] ^ g[rq]
        return int(np.bitwise_count(diff_i).sum() + np.bitwise_count(diff_q).sum())

    def count_bit_errors(self, sent_labels, detected_labels) -> int:
        diff = np.asarray(sent_labels) ^ np.asarray(detected_labels)
        return int(np.bitwise_count(diff).sum())
