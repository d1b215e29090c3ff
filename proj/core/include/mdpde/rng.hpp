#pragma once

#include <cstdint>
#include <string>

namespace mdpde {

/// SplitMix64 output finalizer; also used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Minimal counter-based generator: the state advances by a fixed odd gamma
/// and each output is a strong mix of the state, so streams seeded by
/// distinct values are independent. Normal variates come from the AS241
/// inverse CDF applied to the 53-bit uniform, which keeps replications
/// reproducible from the algorithm description alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform in (0, 1), 53-bit resolution, never 0 or 1.
  double next_uniform();

  /// Standard normal via inverse CDF.
  double next_normal();

  /// Uniform integer in [0, bound), bound > 0, via 128-bit multiply.
  std::uint64_t next_below(std::uint64_t bound);

  /// Persisted in run metadata so outputs are replicable elsewhere.
  static const char* algorithm_name() { return "splitmix64+as241-inverse-cdf"; }

 private:
  std::uint64_t state_;
};

/// Inverse of the standard normal CDF (Wichura's AS241, double precision).
/// Requires 0 < p < 1.
double inverse_normal_cdf(double p);

}  // namespace mdpde
