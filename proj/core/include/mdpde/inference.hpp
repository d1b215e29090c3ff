#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mdpde/matrix_utils.hpp"
#include "mdpde/objective.hpp"

namespace mdpde {

/// Closed-form asymptotic quantities at a fitted parameter.
struct InferenceReport {
  Matrix b_hat;           // p x p information-type matrix
  Matrix sigma_beta;      // p x p drift covariance
  double wald_stat = 0.0;
  int wald_df = 0;
  double wald_pvalue = 1.0;
  Matrix xi;              // d* x d* score covariance
  Matrix ell;             // d* x d* Hessian-type matrix
  Matrix cov_vech_sigma;  // d* x d* limit covariance of vech(Sigma_hat)
  Matrix joint_cov;       // (p + d*) x (p + d*), block diagonal

  std::string to_json(int indent = 2) const;
};

/// (1/n) sum_i J_i' Sigma^{-1} J_i for caller-supplied d x p drift Jacobians.
Matrix b_matrix_from_jacobians(const std::vector<Matrix>& jacobians,
                               const SpdMatrix& sigma);

/// The information-type matrix for the affine drift, averaging over the
/// observed states: J(x) has columns d a/d B_{jk} = x_k e_j and
/// d a/d b_j = e_j, so the result is ((1/n) sum_i w_i w_i') kron Sigma^{-1}
/// with w_i = (x_{i-1}, 1).
Matrix b_matrix_hat(const SamplePath& path, const DiffusionParams& params);

/// Scalar efficiency factor (1+alpha)^{d+2} / (1+2 alpha)^{d/2+1}.
double sigma_beta_factor(double alpha, int d);

/// Drift covariance: factor * b_hat^{-1}.
Matrix sigma_beta(const Matrix& b_hat, double alpha, int d);

/// Wald statistic n h (beta_hat - beta_null)' sigma_beta^{-1} (... ) and its
/// chi-squared upper-tail p-value with p = dim(beta) degrees of freedom.
std::pair<double, double> wald_test(const Vector& beta_hat,
                                    const Vector& beta_null,
                                    const Matrix& sigma_beta_hat, long n,
                                    double h);

/// The d* x d* matrices of the covariance-estimator limit, elementwise in
/// vech order with A_kl = Sigma0^{-1} S_kl:
///   Xi_{kl,rs} = (1+a)^{d+2} (1+2a)^{-d/2-2} [a^2 tr(A_kl) tr(A_rs)
///                 + tr(A_kl A_rs)/2] - (a^2/4) tr(A_kl) tr(A_rs),
///   L_{kl,rs}  = a^2 tr(A_kl) tr(A_rs) / (4(1+a)) + tr(A_kl A_rs) / (2(1+a)).
std::pair<Matrix, Matrix> xi_ell_matrices(const SpdMatrix& sigma0,
                                          double alpha);

/// ell^{-T} xi ell^{-1} by factorization.
Matrix cov_vech_sigma(const Matrix& xi, const Matrix& ell);

/// Block-diagonal joint covariance; off-diagonal blocks exactly zero.
Matrix joint_covariance(const Matrix& sigma_beta_block, const Matrix& cov_vs);

/// Population limit of the diffusion part of the contrast,
///   Psi(Sigma) = (1+a)^{-d/2} |Sigma|^{-a/2}
///                - (1+1/a) |Sigma|^{-a/2} |I + a L0 Sigma^{-1} L0|^{-1/2},
/// L0 the symmetric square root of sigma0. Uniquely minimized at Sigma =
/// sigma0.
double psi_limit(const SpdMatrix& sigma, const SpdMatrix& sigma0,
                 double alpha);

struct TiltedMoments {
  double m0;  // E exp(-(a/2) Z'MZ)
  double m1;  // E (Z'BZ) exp(-(a/2) Z'MZ)
  double m2;  // E (Z'BZ)(Z'CZ) exp(-(a/2) Z'MZ)
};

/// Closed-form Gaussian moments under the exponential tilt, Q = I + alpha M:
/// m0 = |Q|^{-1/2}, m1 = |Q|^{-1/2} tr(B Q^{-1}),
/// m2 = |Q|^{-1/2} [tr(B Q^{-1}) tr(C Q^{-1}) + 2 tr(B Q^{-1} C Q^{-1})].
TiltedMoments tilted_gaussian_moments(const Matrix& M, const Matrix& B,
                                      const Matrix& C, double alpha);

/// Assembles the full report at a fitted parameter, with the Wald test
/// against beta_null.
InferenceReport make_inference_report(const SamplePath& path,
                                      const DiffusionParams& params,
                                      double alpha, const Vector& beta_null);

}  // namespace mdpde
