"""How longer pilots and extra power buy back quantization losses.

Two views of the same trade:

1. Estimation view: the pilot-length multiplier a b-bit system needs to
   match the channel-estimation quality of an unquantized reference.
2. End-to-end SINR view: the (pilot length, Eb/N0) frontier along which a
   quantized link exactly matches a full-precision reference that hits a
   1e-3 BER target, including the regime where no pilot length suffices.
"""

from qmimo import (
    QuantizerSpec,
    alpha_of_bits,
    ebn0_to_pu,
    is_feasible,
    joint_compensation,
    pilot_compensation_estimation,
    required_ebn0,
)


def estimation_table():
    print("pilot-length multiplier to match unquantized estimation (pu = 0 dB)")
    print("users | power  |  1-bit |  2-bit |  3-bit |  4-bit")
    for k in (10, 20):
        for pq_db in (0.0, 3.0):
            pu_q = 10 ** (pq_db / 10)
            cells = " | ".join(
                f"{pilot_compensation_estimation(1.0, 1.0, pu_q, alpha_of_bits(b), k):6.2f}"
                for b in (1, 2, 3, 4)
            )
            print(f"{k:5d} | {pq_db:3.0f} dB | {cells}")


def sinr_frontier():
    n_ant, k, tau_ref, mod = 256, 20, 20.0, 16
    e_ref = required_ebn0(n_ant, k, tau_ref, mod, QuantizerSpec.full_precision(), 1e-3)
    pu_ref = ebn0_to_pu(e_ref, mod)
    print(
        f"\nfull-precision reference: {tau_ref:.0f} pilots at {e_ref:.2f} dB "
        f"reach BER 1e-3 (N={n_ant}, K={k}, 16-QAM)"
    )
    for bits in (2, 3):
        alpha = alpha_of_bits(bits)
        print(f"\n{bits}-bit frontier (pilot length needed at each Eb/N0):")
        for e_q in (-14.0, -13.5, -13.0, -12.0, -10.0, -6.0, -3.0):
            tau_q = joint_compensation(tau_ref, pu_ref, ebn0_to_pu(e_q, mod), alpha, k)
            if is_feasible(tau_q):
                print(f"  {e_q:6.1f} dB -> tau_q >= {tau_q:7.1f}")
            else:
                print(f"  {e_q:6.1f} dB -> no pilot length closes the gap")


def main():
    estimation_table()
    sinr_frontier()


if __name__ == "__main__":
    main()
