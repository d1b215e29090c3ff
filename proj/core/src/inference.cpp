#include "mdpde/inference.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "mdpde/special_functions.hpp"

namespace mdpde {

Matrix b_matrix_from_jacobians(const std::vector<Matrix>& jacobians,
                               const SpdMatrix& sigma) {
  if (jacobians.empty())
    throw std::invalid_argument("b_matrix_from_jacobians: no Jacobians");
  const int p = static_cast<int>(jacobians.front().cols());
  Matrix acc = Matrix::Zero(p, p);
  for (const Matrix& j : jacobians) {
    if (j.rows() != sigma.dim() || j.cols() != p)
      throw std::invalid_argument("b_matrix_from_jacobians: shape mismatch");
    acc += j.transpose() * sigma.solve(j);
  }
  return symmetrize(acc / static_cast<double>(jacobians.size()));
}

Matrix b_matrix_hat(const SamplePath& path, const DiffusionParams& params) {
  path.validate();
  const int d = params.dim();
  if (path.dim() != d)
    throw std::invalid_argument("b_matrix_hat: dimension mismatch");
  const long n = path.n_increments();

  Matrix design(n, d + 1);
  design.leftCols(d) = path.points.topRows(n);
  design.col(d).setOnes();
  const Matrix gram =
      (design.transpose() * design) / static_cast<double>(n);
  const Matrix prec = params.sigma.inverse();

  const int p = d * (d + 1);
  Matrix out(p, p);
  for (int m1 = 0; m1 <= d; ++m1)
    for (int m2 = 0; m2 <= d; ++m2)
      out.block(m1 * d, m2 * d, d, d) = gram(m1, m2) * prec;
  return symmetrize(out);
}

double sigma_beta_factor(double alpha, int d) {
  if (alpha < 0.0) throw std::invalid_argument("sigma_beta_factor: alpha >= 0");
  return std::pow(1.0 + alpha, d + 2) / std::pow(1.0 + 2.0 * alpha, 0.5 * d + 1.0);
}

Matrix sigma_beta(const Matrix& b_hat, double alpha, int d) {
  try {
    const SpdMatrix info(b_hat);
    return symmetrize(sigma_beta_factor(alpha, d) * info.inverse());
  } catch (const std::domain_error&) {
    throw std::domain_error("sigma_beta: singular information matrix");
  }
}

std::pair<double, double> wald_test(const Vector& beta_hat,
                                    const Vector& beta_null,
                                    const Matrix& sigma_beta_hat, long n,
                                    double h) {
  if (beta_hat.size() != beta_null.size() ||
      sigma_beta_hat.rows() != beta_hat.size() ||
      sigma_beta_hat.cols() != beta_hat.size())
    throw std::invalid_argument("wald_test: dimension mismatch");
  const SpdMatrix cov(sigma_beta_hat);
  const Vector diff = beta_hat - beta_null;
  double stat = static_cast<double>(n) * h * diff.dot(cov.solve(diff));
  if (stat < 0.0) stat = 0.0;  // guard against rounding at diff ~ 0
  const int p = static_cast<int>(beta_hat.size());
  return {stat, chi_squared_upper_tail(stat, p)};
}

std::pair<Matrix, Matrix> xi_ell_matrices(const SpdMatrix& sigma0,
                                          double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("xi_ell_matrices: alpha >= 0");
  const int d = sigma0.dim();
  const auto pairs = vech_pairs(d);
  const int m = static_cast<int>(pairs.size());

  std::vector<Matrix> a_mats(m);
  Vector traces(m);
  for (int j = 0; j < m; ++j) {
    a_mats[j] = sigma0.solve(basis_S(pairs[j].first, pairs[j].second, d));
    traces(j) = a_mats[j].trace();
  }

  const double xi_front =
      std::pow(1.0 + alpha, d + 2) * std::pow(1.0 + 2.0 * alpha, -0.5 * d - 2.0);
  const double a_sq = alpha * alpha;

  Matrix xi(m, m), ell(m, m);
  for (int j1 = 0; j1 < m; ++j1) {
    for (int j2 = j1; j2 < m; ++j2) {
      const double tt = traces(j1) * traces(j2);
      const double tp = trace_product(a_mats[j1], a_mats[j2]);
      const double xi_v = xi_front * (a_sq * tt + 0.5 * tp) - 0.25 * a_sq * tt;
      const double ell_v =
          (0.25 * a_sq * tt + 0.5 * tp) / (1.0 + alpha);
      xi(j1, j2) = xi(j2, j1) = xi_v;
      ell(j1, j2) = ell(j2, j1) = ell_v;
    }
  }
  return {std::move(xi), std::move(ell)};
}

Matrix cov_vech_sigma(const Matrix& xi, const Matrix& ell) {
  try {
    const SpdMatrix ell_spd(ell);
    const Matrix tmp = ell_spd.solve(xi).transpose();
    return symmetrize(ell_spd.solve(tmp).transpose());
  } catch (const std::domain_error&) {
    throw std::domain_error("cov_vech_sigma: singular Hessian-type matrix");
  }
}

Matrix joint_covariance(const Matrix& sigma_beta_block, const Matrix& cov_vs) {
  const int p = static_cast<int>(sigma_beta_block.rows());
  const int m = static_cast<int>(cov_vs.rows());
  Matrix out = Matrix::Zero(p + m, p + m);
  out.topLeftCorner(p, p) = sigma_beta_block;
  out.bottomRightCorner(m, m) = cov_vs;
  return out;
}

double psi_limit(const SpdMatrix& sigma, const SpdMatrix& sigma0,
                 double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("psi_limit: alpha must be > 0");
  if (sigma.dim() != sigma0.dim())
    throw std::invalid_argument("psi_limit: dimension mismatch");
  const int d = sigma.dim();
  const Matrix lambda0 = sym_sqrt(sigma0);
  const Matrix inner =
      Matrix::Identity(d, d) + alpha * (lambda0 * sigma.solve(lambda0));
  const SpdMatrix inner_spd(symmetrize(inner));
  const double s = std::exp(-0.5 * alpha * sigma.log_det());
  const double tilt = std::exp(-0.5 * inner_spd.log_det());
  return std::pow(1.0 + alpha, -0.5 * d) * s - (1.0 + 1.0 / alpha) * s * tilt;
}

TiltedMoments tilted_gaussian_moments(const Matrix& M, const Matrix& B,
                                      const Matrix& C, double alpha) {
  const int d = static_cast<int>(M.rows());
  if (M.cols() != d || B.rows() != d || B.cols() != d || C.rows() != d ||
      C.cols() != d)
    throw std::invalid_argument("tilted_gaussian_moments: square same-size matrices");
  const Matrix q = Matrix::Identity(d, d) + alpha * symmetrize(M);
  const SpdMatrix q_spd(q);  // throws domain_error when I + alpha M is not PD

  const Matrix bq = q_spd.solve(symmetrize(B)).transpose();  // (Q^{-1} B)' = B Q^{-1}
  const Matrix cq = q_spd.solve(symmetrize(C)).transpose();
  const double m0 = std::exp(-0.5 * q_spd.log_det());
  const double tr_b = bq.trace();
  const double tr_c = cq.trace();
  return {m0, m0 * tr_b, m0 * (tr_b * tr_c + 2.0 * (bq * cq).trace())};
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (long r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string InferenceReport::to_json(int indent) const {
  nlohmann::json j;
  j["b_hat"] = matrix_to_json(b_hat);
  j["sigma_beta"] = matrix_to_json(sigma_beta);
  j["wald_stat"] = wald_stat;
  j["wald_df"] = wald_df;
  j["wald_pvalue"] = wald_pvalue;
  j["xi"] = matrix_to_json(xi);
  j["ell"] = matrix_to_json(ell);
  j["cov_vech_sigma"] = matrix_to_json(cov_vech_sigma);
  j["joint_cov"] = matrix_to_json(joint_cov);
  return j.dump(indent);
}

InferenceReport make_inference_report(const SamplePath& path,
                                      const DiffusionParams& params,
                                      double alpha, const Vector& beta_null) {
  InferenceReport rep;
  rep.b_hat = b_matrix_hat(path, params);
  rep.sigma_beta = sigma_beta(rep.b_hat, alpha, params.dim());
  const Vector beta_hat = pack_beta(params.drift);
  std::tie(rep.wald_stat, rep.wald_pvalue) =
      wald_test(beta_hat, beta_null, rep.sigma_beta, path.n_increments(),
                path.h);
  rep.wald_df = static_cast<int>(beta_hat.size());
  std::tie(rep.xi, rep.ell) = xi_ell_matrices(params.sigma, alpha);
  rep.cov_vech_sigma = mdpde::cov_vech_sigma(rep.xi, rep.ell);
  rep.joint_cov = joint_covariance(rep.sigma_beta, rep.cov_vech_sigma);
  return rep;
}

}  // namespace mdpde
