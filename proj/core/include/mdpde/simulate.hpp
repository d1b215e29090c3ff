#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "mdpde/matrix_utils.hpp"

namespace mdpde {

/// Affine drift a(x) = B x + b.
struct DriftAffine {
  Matrix B;
  Vector b;

  int dim() const { return static_cast<int>(b.size()); }
  Vector eval(const Vector& x) const { return B * x + b; }
  void validate() const;
};

/// Equally spaced observations X_0, ..., X_n with step h; row i is X_{t_i},
/// t_i = i * h.
struct SamplePath {
  double h = 0.0;
  Matrix points;  // (n+1) x d

  int n_increments() const { return static_cast<int>(points.rows()) - 1; }
  int dim() const { return static_cast<int>(points.cols()); }
  void validate() const;
};

/// Additive contamination: a fraction eps of the n+1 observation times is
/// selected uniformly without replacement and shifted by kappa * N(0, I_d).
struct ContaminationSpec {
  double eps = 0.0;
  double kappa = 0.0;
  std::uint64_t rng_seed = 0;
};

class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(int step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Step-size schedule h_n = n^{-0.55}.
double step_size(long n);

/// Euler scheme X_i = X_{i-1} + (B X_{i-1} + b) h + Lambda sqrt(h) z_i with
/// Lambda the symmetric square root of sigma and z_i iid standard normal
/// from the seeded stream. sigma must be SPD or exactly zero (deterministic
/// paths for testing). Throws SimulationDiverged if the path leaves the
/// finite range.
SamplePath simulate_path(const DriftAffine& drift, const Matrix& sigma,
                         const Vector& x0, long n, double h,
                         std::uint64_t seed);

/// Returns a copy of `path` with round(eps * (n+1)) rows shifted by
/// kappa * N(0, I_d); all other rows are bit-identical to the input.
/// The initial observation t = 0 is eligible for selection.
SamplePath contaminate(const SamplePath& path, const ContaminationSpec& spec);

/// CSV with header t,x1,...,xd; 17 significant digits.
void write_path_csv(const SamplePath& path, std::ostream& out);
void write_path_csv_file(const SamplePath& path, const std::string& filename);
SamplePath read_path_csv(std::istream& in);
SamplePath read_path_csv_file(const std::string& filename);

}  // namespace mdpde
