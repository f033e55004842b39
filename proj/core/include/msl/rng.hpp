#pragma once

// Reproducible random streams.
//
// Generator: xoshiro256** (Blackman & Vigna), 64-bit output.
// Stream splitting: the 256-bit state of stream (master_seed, stream_id) is
// four consecutive SplitMix64 outputs started from
//     key = splitmix64(master_seed) ^ (stream_id * 0xD1B54A32D192ED03)
// where splitmix64(x) denotes the first SplitMix64 output seeded with x.
// The raw 64-bit sequence is therefore a pure function of
// (master_seed, stream_id) on every platform. Derived variates (normal,
// gamma, Student t) are built only from these bits and <cmath>.

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace msl {

class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::array<std::uint64_t, 4> state) : s_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }
  std::uint64_t next();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Uniform integer in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);
  /// +1 or -1 with probability 1/2 each.
  int rademacher();
  /// Standard normal via Box-Muller (one variate per call).
  double normal();
  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);
  /// Student t with `dof` degrees of freedom.
  double student_t(double dof);
  /// Index drawn with the given probabilities (assumed to sum to 1).
  int categorical(std::span<const double> probs);

 private:
  std::array<std::uint64_t, 4> s_;
};

/// One SplitMix64 step: advances `state` and returns the output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Independent, reproducible stream `stream_id` of `master_seed`.
RandomStream rng_stream(std::uint64_t master_seed, std::uint64_t stream_id);

}  // namespace msl
