"""Design Lloyd-Max codebooks and verify their AQNM gains empirically.

Walks through the quantizer layer: design the MMSE codebook for each bit
depth, compare the analytic gain (1 - distortion) against the reference
table and against a least-squares fit on a million random samples, and
show the 2-bit codebook geometry.
"""

import numpy as np

from qmimo import TABLE_ALPHA, design_codebook, empirical_alpha


def main():
    print("bit depth | alpha (design) | alpha (table) | alpha (1e6-sample fit)")
    print("-" * 68)
    for bits in range(1, 6):
        cb = design_codebook(bits)
        fitted = empirical_alpha(cb, 1_000_000, seed=2024 + bits)
        print(
            f"{bits:9d} | {cb.alpha:14.6f} | {TABLE_ALPHA[bits]:13.6f} | {fitted:.6f}"
        )

    cb2 = design_codebook(2)
    print("\n2-bit codebook on a unit-variance Gaussian rail:")
    print("  thresholds:", np.round(cb2.thresholds, 6))
    print("  levels:    ", np.round(cb2.levels, 6))
    print("  distortion:", round(cb2.distortion, 6))
    print("\nserialized record:")
    print(" ", cb2.to_json())
    print("  sha256:", cb2.content_hash())


if __name__ == "__main__":
    main()
