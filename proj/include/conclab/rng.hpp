#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace conclab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stateless: every 128-bit counter maps to four independent 32-bit words
/// under a 64-bit key, so draws can be indexed by (member, step, slot)
/// and evaluated in any order without changing the output.
struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

/// Named noise streams so independent uses of the master seed never collide.
enum class RngStream : std::uint32_t {
  Increments = 0,   // SDE / rank-model Gaussian increments
  Auxiliary = 1,    // auxiliary reflected drift process in rank_local_times
  Probes = 2,       // Lipschitz probe paths
  Sampling = 3,     // generic scalar sampling (tests, CLI sample generators)
};

/// Deterministic keyed view of the Philox stream: one double per
/// (member, step, slot) triple within a stream.
class CounterRng {
 public:
  CounterRng(std::uint64_t master_seed, RngStream stream)
      : key_{static_cast<std::uint32_t>(master_seed),
             static_cast<std::uint32_t>(master_seed >> 32)},
        stream_(static_cast<std::uint32_t>(stream)) {}

  /// Uniform draw in (0, 1].
  double uniform(std::uint64_t member, std::uint64_t step, std::uint32_t slot) const {
    const auto w = words(member, step, slot);
    return to_unit(w[0], w[1]);
  }

  /// Standard normal via Box-Muller on one Philox block.
  double normal(std::uint64_t member, std::uint64_t step, std::uint32_t slot) const {
    const auto w = words(member, step, slot);
    const double u1 = to_unit(w[0], w[1]);
    const double u2 = to_unit(w[2], w[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::array<std::uint32_t, 4> words(std::uint64_t member, std::uint64_t step,
                                     std::uint32_t slot) const {
    // Counter layout: (member, step-low, step-high ^ slot-extension, slot|stream).
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(member),
        static_cast<std::uint32_t>(step),
        static_cast<std::uint32_t>(member >> 32) ^ (static_cast<std::uint32_t>(step >> 32) << 16),
        (slot << 8) ^ stream_};
    return Philox4x32::block(ctr, key_);
  }

  // 64 bits -> (0, 1]: top 53 bits shifted into the mantissa, never zero.
  static double to_unit(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t x = (static_cast<std::uint64_t>(a) << 32) | b;
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
};

}  // namespace conclab
