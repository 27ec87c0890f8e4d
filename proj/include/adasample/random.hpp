#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace adasample {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A pure function of (counter, key): no hidden state, so any block of the
/// output stream can be produced independently of every other block.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Disjoint families of streams derived from one base seed.
enum class StreamDomain : std::uint32_t {
  kSamples = 0,
  kParameters = 1,
  kReference = 2,
  kEvaluation = 3,
};

/// Coordinates of one independent random stream.
struct StreamCoordinate {
  std::uint64_t seed = 0;
  StreamDomain domain = StreamDomain::kSamples;
  std::uint32_t iteration = 0;
  std::uint32_t index = 0;
};

/// Sequential view over the Philox blocks at a fixed stream coordinate.
///
/// Satisfies UniformRandomBitGenerator so it can also drive std distributions,
/// but uniform()/normal() below are the ones used by the library since their
/// output is identical across standard-library implementations.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  explicit CounterStream(const StreamCoordinate& coord)
      : key_{static_cast<std::uint32_t>(coord.seed), static_cast<std::uint32_t>(coord.seed >> 32)},
        index_(coord.index),
        iteration_(coord.iteration),
        domain_(static_cast<std::uint32_t>(coord.domain)) {}

  CounterStream(std::uint64_t seed, StreamDomain domain, std::uint32_t iteration, std::uint32_t index)
      : CounterStream(StreamCoordinate{seed, domain, iteration, index}) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  std::uint32_t next_u32() {
    if (lane_ == 4) {
      block_ = Philox4x32::generate({block_counter_++, index_, iteration_, domain_}, key_);
      lane_ = 0;
    }
    return block_[lane_++];
  }

  result_type operator()() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1).
  double uniform_open() { return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  Philox4x32::Key key_;
  std::uint32_t index_;
  std::uint32_t iteration_;
  std::uint32_t domain_;
  std::uint32_t block_counter_ = 0;
  Philox4x32::Counter block_{};
  int lane_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace adasample
