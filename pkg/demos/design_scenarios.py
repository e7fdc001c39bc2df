"""Design-space answers from the scenario solvers.

Four quick studies on a 16-QAM uplink:
- the power each ADC resolution needs to hit a BER target,
- the smallest antenna array that supports 20 users at -8 dB,
- the largest user load a 256-antenna array carries at a given power,
- the ADC resolution minimizing total receiver power, with the antenna
  counts where adjacent resolutions trade places.
"""

from qmimo import (
    PowerModel,
    QuantizerSpec,
    is_feasible,
    max_users,
    min_antennas,
    power_optimal_resolution,
    required_ebn0,
)


def required_power_study():
    print("required Eb/N0 for BER 1e-3 (N=256, K=20, 16-QAM):")
    for bits, tau in ((2, 30.0), (3, 50.0), (4, 20.0)):
        e = required_ebn0(256, 20, tau, 16, QuantizerSpec.from_bits(bits), 1e-3)
        print(f"  {bits}-bit, {tau:.0f} pilots: {e:7.2f} dB")
    e_full = required_ebn0(256, 20, 20.0, 16, QuantizerSpec.full_precision(), 1e-3)
    print(f"  full precision, 20 pilots: {e_full:.2f} dB")
    e_1bit = required_ebn0(256, 20, 40.0, 16, QuantizerSpec.from_bits(1), 1e-2)
    print("  1-bit, any power, target 1e-2:", "feasible" if is_feasible(e_1bit) else "infeasible")


def antenna_study():
    print("\nminimum antennas for 20 users at -8 dB, BER 1e-3, 30 pilots:")
    for bits in (2, 3, 4):
        n = min_antennas(20, QuantizerSpec.from_bits(bits), 30.0, 16, 1e-3, -8.0)
        print(f"  {bits}-bit: {int(n)} antennas")


def user_study():
    print("\nmax users on 256 antennas, 40 pilots, BER 1e-4:")
    for bits, e in ((3, -10.7), (4, -12.1), (2, 0.0)):
        k = max_users(256, QuantizerSpec.from_bits(bits), 40.0, 16, 1e-4, e)
        print(f"  {bits}-bit at {e:6.1f} dB: {k} users")


def power_study():
    print("\ntotal receiver power vs antennas (QPSK, K=20, 40 pilots, BER 1e-3)")
    model = PowerModel(
        fom_fj=1432.1, sample_rate_hz=100e6, rf_per_antenna_w=0.0, static_w=0.0,
        noise_ref_w=0.01,
    )
    result = power_optimal_resolution(
        model, 20, 40.0, 4, 1e-3, [1, 2, 3, 4], range(50, 1001, 10)
    )
    print(f"  optimum: {result.best_bits}-bit ADCs with {result.best_n} antennas "
          f"({result.best_p_total_w:.3f} W)")
    for c in result.crossings:
        print(f"  {c.bits_low}-bit and {c.bits_high}-bit curves cross near "
              f"N = {c.n_antennas:.0f}")


def main():
    required_power_study()
    antenna_study()
    user_study()
    power_study()


if __name__ == "__main__":
    main()
