#pragma once

// Deterministic random numbers.
//
// The engine is xoshiro256** (Blackman & Vigna, 2018) seeded through
// splitmix64. The generator identity is part of the reproducibility
// contract: same seed, same stream, same numbers on every platform.
// Distributions come from Boost.Random, whose algorithms are fixed
// (unlike the implementation-defined std:: distributions).

#include <array>
#include <cstdint>
#include <limits>

namespace semivar {

/// One step of the splitmix64 sequence; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  /// Independent stream keyed by (seed, stream). Used to give each Monte-Carlo
  /// path or each optimizer window its own generator, so results do not depend
  /// on the order or the thread in which streams are consumed.
  static Rng substream(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  /// Uniform integer on [0, n); n > 0. Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) noexcept;

  double normal();
  double exponential(double mean);
  /// Gamma with the given shape and scale (mean = shape * scale).
  double gamma(double shape, double scale);
  double beta(double a, double b);
  std::uint64_t poisson(double mean);

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace semivar
