"""Channel-estimation error: closed form against Monte Carlo.

Sweeps the pilot length for a 20-user system with 3-bit ADCs and overlays
the analytic error variance L/(L + tau*pu) with the measured per-entry
error of the simulated LMMSE estimator. Also prints the power-sweep view:
the error variance saturates at a quantization floor instead of vanishing
as transmit power grows.

Run with --plot to draw both sweeps (requires matplotlib).
"""

import argparse

from qmimo import (
    CsiMode,
    LinkParameters,
    QuantizerSpec,
    SimConfig,
    estimation_error_floor,
    estimation_variances,
    run_estimation_error,
)

N_ANTENNAS, N_USERS, BITS = 32, 20, 3


def pilot_sweep(pu=0.5, taus=range(20, 70, 5), n_blocks=48, seed=7):
    quant = QuantizerSpec.from_bits(BITS)
    rows = []
    for tau in taus:
        params = LinkParameters(N_ANTENNAS, N_USERS, tau, pu, 16)
        analytic = estimation_variances(params, quant).var_error
        cfg = SimConfig(params, quant, n_blocks, 1, seed=seed)
        stats = run_estimation_error(cfg)
        rows.append((tau, analytic, stats.value, stats.stderr))
    return rows


def power_sweep(tau=20, powers=(0.125, 0.5, 2.0, 8.0, 32.0, 128.0, 1024.0), n_blocks=48, seed=8):
    quant = QuantizerSpec.from_bits(BITS)
    rows = []
    for pu in powers:
        params = LinkParameters(N_ANTENNAS, N_USERS, tau, pu, 16)
        analytic = estimation_variances(params, quant).var_error
        cfg = SimConfig(params, quant, n_blocks, 1, seed=seed)
        stats = run_estimation_error(cfg)
        rows.append((pu, analytic, stats.value, stats.stderr))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--plot", action="store_true")
    args = parser.parse_args()

    print(f"pilot-length sweep (K={N_USERS}, b={BITS}, pu=0.5)")
    print("tau | analytic | simulated | stderr")
    pilot_rows = pilot_sweep()
    for tau, ana, emp, se in pilot_rows:
        print(f"{tau:3d} | {ana:.5f}  | {emp:.5f}   | {se:.5f}")

    floor = estimation_error_floor(QuantizerSpec.from_bits(BITS).alpha, N_USERS, 20)
    print(f"\npower sweep (tau=20); quantization floor = {floor:.5f}")
    print("   pu    | analytic | simulated")
    power_rows = power_sweep()
    for pu, ana, emp, _ in power_rows:
        print(f"{pu:8.3f} | {ana:.5f}  | {emp:.5f}")

    if args.plot:
        import matplotlib.pyplot as plt

        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
        taus = [r[0] for r in pilot_rows]
        ax1.plot(taus, [r[1] for r in pilot_rows], "k-", label="analytic")
        ax1.errorbar(
            taus, [r[2] for r in pilot_rows], yerr=[3 * r[3] for r in pilot_rows],
            fmt="o", ms=4, label="simulated",
        )
        ax1.set_xlabel("pilot length")
        ax1.set_ylabel("error variance")
        ax1.legend()
        powers = [r[0] for r in power_rows]
        ax2.loglog(powers, [r[1] for r in power_rows], "k-", label="analytic")
        ax2.loglog(powers, [r[2] for r in power_rows], "o", ms=4, label="simulated")
        ax2.axhline(floor, ls="--", c="gray", label="floor")
        ax2.set_xlabel("per-user SNR (linear)")
        ax2.legend()
        fig.tight_layout()
        fig.savefig("estimation_error_sweep.png", dpi=140)
        print("\nwrote estimation_error_sweep.png")


if __name__ == "__main__":
    main()
