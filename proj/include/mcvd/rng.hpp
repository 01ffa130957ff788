#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>

namespace mcvd {

/// Philox4x32-10 block cipher (Salmon et al., Random123).
/// Maps a 128-bit counter and a 64-bit key to 128 random bits.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter encrypt(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      ctr = single_round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter single_round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Standard normal sampler: 128-layer ziggurat (Marsaglia and Tsang, in the
/// ZIGNOR arrangement of Doornik) with the exact exponential tail method.
class Ziggurat {
 public:
  static constexpr int kLayers = 128;
  static constexpr double kR = 3.442619855899;
  static constexpr double kV = 9.91256303526217e-3;

  static const Ziggurat& instance() {
    static const Ziggurat table;
    return table;
  }

  /// `bits` supplies 64 uniform bits per call, `uniform` an open (0,1) draw.
  template <typename Bits, typename Uniform>
  double sample(Bits&& bits, Uniform&& uniform) const {
    for (;;) {
      const std::uint64_t w = bits();
      const auto layer = static_cast<int>(w & (kLayers - 1));
      const double u = 2.0 * ((static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53) - 1.0;
      if (std::abs(u) < ratio_[layer]) return u * x_[layer];
      if (layer == 0) return tail(u < 0.0, uniform);
      const double x = u * x_[layer];
      const double f0 = std::exp(-0.5 * (x_[layer] * x_[layer] - x * x));
      const double f1 = std::exp(-0.5 * (x_[layer + 1] * x_[layer + 1] - x * x));
      if (f1 + uniform() * (f0 - f1) < 1.0) return x;
    }
  }

 private:
  Ziggurat() {
    double f = std::exp(-0.5 * kR * kR);
    x_[0] = kV / f;
    x_[1] = kR;
    x_[kLayers] = 0.0;
    for (int i = 2; i < kLayers; ++i) {
      x_[i] = std::sqrt(-2.0 * std::log(kV / x_[i - 1] + f));
      f = std::exp(-0.5 * x_[i] * x_[i]);
    }
    for (int i = 0; i < kLayers; ++i) ratio_[i] = x_[i + 1] / x_[i];
  }

  template <typename Uniform>
  static double tail(bool negative, Uniform&& uniform) {
    double x = 0.0;
    double y = 0.0;
    do {
      x = std::log(uniform()) / kR;
      y = std::log(uniform());
    } while (-2.0 * y < x * x);
    return negative ? x - kR : kR - x;
  }

  std::array<double, kLayers + 1> x_{};
  std::array<double, kLayers> ratio_{};
};

/// Independent random stream addressed by (seed, stream id).
///
/// The 256-bit xoshiro256++ state is the Philox4x32-10 encryption of the
/// counters (stream id, 0) and (stream id, 1) under the 64-bit seed, so a
/// stream depends only on its address and never on how streams are scheduled
/// across threads. Uniforms take the top 53 bits of a 64-bit word and lie in
/// (0, 1); normals come from the ziggurat above.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) {
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed),
                              static_cast<std::uint32_t>(seed >> 32)};
    for (std::uint32_t half = 0; half < 2; ++half) {
      const auto out = Philox4x32::encrypt(
          {half, 0u, static_cast<std::uint32_t>(stream_id),
           static_cast<std::uint32_t>(stream_id >> 32)},
          key);
      state_[2 * half] = (std::uint64_t{out[1]} << 32) | out[0];
      state_[2 * half + 1] = (std::uint64_t{out[3]} << 32) | out[2];
    }
    // xoshiro must not start from the all-zero state.
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal variate.
  double normal() {
    return Ziggurat::instance().sample([this] { return next_u64(); },
                                       [this] { return uniform(); });
  }

 private:
  std::array<std::uint64_t, 4> state_{};
};

/// SplitMix64 finalizer; used to derive sub-seeds from (seed, label).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace mcvd
