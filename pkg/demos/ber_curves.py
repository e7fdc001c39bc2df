"""Analytic BER curves with a Monte Carlo overlay.

Reproduces the headline picture: uncoded 16-QAM in a 64-antenna, 8-user
uplink with estimated CSI, for 2/3/4-bit ADCs and full precision. The
closed-form curves come from the two-term expansion; the simulator overlay
uses modest runs sized for a few hundred errors per point.

Run with --plot for the figure (requires matplotlib), --skip-sim to print
only the analytic table.
"""

import argparse
import math

import numpy as np

from qmimo import (
    FULL_PRECISION,
    LinkParameters,
    QuantizerSpec,
    Regime,
    SimConfig,
    ber_two_term,
    ebn0_to_pu,
    run_ber,
)

N_ANT, N_USERS, PILOTS, MOD = 64, 8, 16, 16
RESOLUTIONS = (2, 3, 4, FULL_PRECISION)


def quant_of(bits):
    return QuantizerSpec.full_precision() if bits == FULL_PRECISION else QuantizerSpec.from_bits(bits)


def analytic_curve(bits, grid):
    quant = quant_of(bits)
    out = []
    for e in grid:
        params = LinkParameters(N_ANT, N_USERS, PILOTS, ebn0_to_pu(e, MOD), MOD)
        out.append(ber_two_term(params, quant, Regime.IMPERFECT_CSI_QUANTIZED))
    return out


def simulate_points(bits, grid, seed=99):
    quant = quant_of(bits)
    out = []
    for e in grid:
        params = LinkParameters(N_ANT, N_USERS, PILOTS, ebn0_to_pu(e, MOD), MOD)
        # ~300 expected errors per point, capped so the deepest points stay quick
        target = max(analytic_curve(bits, [e])[0], 3e-4)
        n_blocks = min(100, max(10, math.ceil(300 / (target * 16000))))
        result = run_ber(SimConfig(params, quant, n_blocks, 500, seed=seed))
        out.append(result)
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--plot", action="store_true")
    parser.add_argument("--skip-sim", action="store_true")
    args = parser.parse_args()

    grid = list(np.arange(-12.0, -1.9, 1.0))
    curves = {bits: analytic_curve(bits, grid) for bits in RESOLUTIONS}

    header = "Eb/N0 dB | " + " | ".join(f"b={b}" if b != FULL_PRECISION else "full " for b in RESOLUTIONS)
    print(header)
    print("-" * len(header))
    for i, e in enumerate(grid):
        cells = " | ".join(f"{curves[b][i]:8.2e}" for b in RESOLUTIONS)
        print(f"{e:8.1f} | {cells}")

    sims = {}
    if not args.skip_sim:
        sim_grid = grid[::3]
        print("\nMonte Carlo overlay (95% intervals):")
        for bits in RESOLUTIONS:
            sims[bits] = simulate_points(bits, sim_grid)
            label = f"b={bits}" if bits != FULL_PRECISION else "full"
            cells = ", ".join(
                f"{e:+.0f} dB: {r.ber:.2e} [{r.ci_low:.1e}, {r.ci_high:.1e}]"
                for e, r in zip(sim_grid, sims[bits])
            )
            print(f"  {label:5s} {cells}")

    if args.plot:
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5.5, 4))
        for bits in RESOLUTIONS:
            label = f"{bits}-bit" if bits != FULL_PRECISION else "full precision"
            (line,) = ax.semilogy(grid, curves[bits], label=label)
            if bits in sims:
                sim_grid = grid[::3]
                ax.semilogy(
                    sim_grid, [r.ber for r in sims[bits]], "o", ms=4, color=line.get_color()
                )
        ax.set_xlabel("Eb/N0 (dB)")
        ax.set_ylabel("BER")
        ax.set_ylim(1e-6, 0.5)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig("ber_curves.png", dpi=140)
        print("\nwrote ber_curves.png")


if __name__ == "__main__":
    main()
