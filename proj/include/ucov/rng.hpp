#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace ucov {

/// Deterministic pseudo-random stream addressed by (seed, purpose label,
/// replica index). The same triple always yields the same sequence, on any
/// platform, so parallel replicas can each own an independent stream and
/// results do not depend on scheduling.
///
/// Generator: xoshiro256** seeded through splitmix64. All samplers below are
/// implemented in-house instead of via <random> distributions, whose output
/// is implementation-defined and would break cross-compiler reproducibility.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [a, b).
  double uniform_in(double a, double b);
  /// Gaussian via Box-Muller; the second variate of each pair is cached.
  double gaussian(double mean, double sd);
  /// Exponential with the given rate (mean 1/rate), by inversion.
  double exponential(double rate);
  /// Poisson counts; multiplication method below mean 50, PTRS rejection above.
  std::uint64_t poisson(double mean);

 private:
  std::array<std::uint64_t, 4> state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ucov
