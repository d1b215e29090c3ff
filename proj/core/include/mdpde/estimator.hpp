#pragma once

#include <optional>
#include <stdexcept>

#include "mdpde/objective.hpp"

namespace mdpde {

struct MdpdeConfig {
  double alpha = 0.0;
  int max_iters = 500;
  double grad_tol = 1e-8;   // max-abs gradient in transformed coordinates
  double step_tol = 1e-10;
  std::optional<DiffusionParams> init;  // empty: ordinary least squares
  bool multistart = false;  // 5-point multistart around the OLS start

  void validate() const;
};

struct FitResult {
  DiffusionParams params;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
};

class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(int iterations, const std::string& what)
      : std::runtime_error(what), iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

/// Least-squares warm start from the regression form dX/h = B x + b + eta:
/// (B, b) by least squares, Sigma from the scaled residual covariance, with
/// eigenvalue flooring if that covariance is not positive definite.
DiffusionParams ols_init(const SamplePath& path);

/// Minimizes the MDPDE contrast over (beta, log-Cholesky(Sigma)) by BFGS.
/// Deterministic; non-convergence is reported through FitResult, a
/// non-finite objective at the start through NumericalFailure.
FitResult fit(const SamplePath& path, const MdpdeConfig& cfg);

}  // namespace mdpde
