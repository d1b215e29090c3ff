#pragma once

#include "mdpde/matrix_utils.hpp"
#include "mdpde/simulate.hpp"

namespace mdpde {

/// Full parameter theta = (beta, vech(Sigma)) with beta = (vec(B), b),
/// vec() column-major, p = d^2 + d.
struct DiffusionParams {
  DriftAffine drift;
  SpdMatrix sigma;

  int dim() const { return sigma.dim(); }
  int beta_size() const { return dim() * (dim() + 1); }
};

/// beta = (vec(B) column-major, b).
Vector pack_beta(const DriftAffine& drift);
DriftAffine unpack_beta(const Vector& beta, int d);

struct ObjectiveValue {
  double value = 0.0;
  Vector grad_beta;
  Vector grad_vech_sigma;
};

/// Row i holds X_{t_i} - X_{t_{i-1}} - (B X_{t_{i-1}} + b) h.
Matrix residuals(const SamplePath& path, const DriftAffine& drift);

/// Average contrast (1/n) sum_i V_i^alpha(theta) together with its analytic
/// gradient in (beta, vech(Sigma)). For alpha > 0,
///   V_i = (1+alpha)^{-d/2} |Sigma|^{-alpha/2}
///         - (1 + 1/alpha) |Sigma|^{-alpha/2} exp(-(alpha/2h) R_i' Sigma^{-1} R_i);
/// alpha = 0 is the Gaussian quasi-likelihood branch
///   (1/n) sum_i [ log|Sigma|/2 + R_i' Sigma^{-1} R_i / (2h) ],
/// with constants in 2*pi and h dropped.
ObjectiveValue objective(const SamplePath& path, const DiffusionParams& params,
                         double alpha);

/// Analytic d/d(beta) of the average contrast, alpha > 0.
Vector gradient_beta(const SamplePath& path, const DiffusionParams& params,
                     double alpha);

/// Analytic d/d(sigma_rs) of the average contrast, in vech order, alpha > 0.
/// Each component is the derivative moving sigma_rs and sigma_sr together.
Vector gradient_vech_sigma(const SamplePath& path,
                           const DiffusionParams& params, double alpha);

/// Shared per-path workspace: precomputes increments and design rows once,
/// then evaluates the contrast repeatedly during optimization.
class ObjectiveEvaluator {
 public:
  ObjectiveEvaluator(const SamplePath& path, double alpha);

  int dim() const { return d_; }
  int beta_size() const { return d_ * (d_ + 1); }
  double alpha() const { return alpha_; }

  ObjectiveValue evaluate(const DiffusionParams& params) const;

  /// Value and gradient in unconstrained coordinates
  /// x = (beta, log-Cholesky of Sigma); gradient of Sigma is pushed through
  /// the parameterization analytically. Non-finite values are returned as-is
  /// for the line search to reject.
  double eval_transformed(const Vector& x, Vector& grad) const;

  static Vector pack_transformed(const DiffusionParams& params);
  DiffusionParams unpack_transformed(const Vector& x) const;

 private:
  struct Parts {
    double value;
    Matrix grad_coef;    // d x (d+1), gradient in Theta = [B b]
    Matrix grad_sigma;   // d x d, symmetric free-matrix gradient in Sigma
    bool finite;
  };
  Parts eval_parts(const DriftAffine& drift, const SpdMatrix& sigma) const;

  double alpha_;
  double h_;
  int d_;
  long n_;
  Matrix x_prev_;  // n x d
  Matrix dx_;      // n x d
  Matrix design_;  // n x (d+1), rows (x_{i-1}', 1)

  friend ObjectiveValue objective(const SamplePath&, const DiffusionParams&,
                                  double);
};

}  // namespace mdpde
