#include "mdpde/objective.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace mdpde {

Vector pack_beta(const DriftAffine& drift) {
  const int d = drift.dim();
  Vector beta(d * (d + 1));
  int idx = 0;
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) beta(idx++) = drift.B(r, c);
  for (int r = 0; r < d; ++r) beta(idx++) = drift.b(r);
  return beta;
}

DriftAffine unpack_beta(const Vector& beta, int d) {
  if (beta.size() != d * (d + 1))
    throw std::invalid_argument("unpack_beta: wrong length");
  DriftAffine drift;
  drift.B.resize(d, d);
  drift.b.resize(d);
  int idx = 0;
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) drift.B(r, c) = beta(idx++);
  for (int r = 0; r < d; ++r) drift.b(r) = beta(idx++);
  return drift;
}

Matrix residuals(const SamplePath& path, const DriftAffine& drift) {
  path.validate();
  drift.validate();
  const long n = path.n_increments();
  const int d = path.dim();
  if (drift.dim() != d)
    throw std::invalid_argument("residuals: drift dimension mismatch");
  const auto& pts = path.points;
  Matrix x_prev = pts.topRows(n);
  Matrix r = pts.bottomRows(n) - x_prev -
             path.h * (x_prev * drift.B.transpose() +
                       Vector::Ones(n) * drift.b.transpose());
  return r;
}

ObjectiveEvaluator::ObjectiveEvaluator(const SamplePath& path, double alpha)
    : alpha_(alpha), h_(path.h) {
  if (alpha < 0.0)
    throw std::invalid_argument("objective: alpha must be >= 0");
  path.validate();
  n_ = path.n_increments();
  d_ = path.dim();
  x_prev_ = path.points.topRows(n_);
  dx_ = path.points.bottomRows(n_) - x_prev_;
  design_.resize(n_, d_ + 1);
  design_.leftCols(d_) = x_prev_;
  design_.col(d_).setOnes();
}

ObjectiveEvaluator::Parts ObjectiveEvaluator::eval_parts(
    const DriftAffine& drift, const SpdMatrix& sigma) const {
  Parts parts;
  parts.finite = true;
  const Matrix prec = sigma.inverse();
  const double log_det = sigma.log_det();

  // R_i = dX_i - (B x_{i-1} + b) h, U = R Sigma^{-1}
  const Matrix theta = (Matrix(d_, d_ + 1) << drift.B, drift.b).finished();
  const Matrix resid = dx_ - h_ * (design_ * theta.transpose());
  const Matrix u = resid * prec;
  const Vector quad = resid.cwiseProduct(u).rowwise().sum() / h_;

  const double inv_n = 1.0 / static_cast<double>(n_);
  if (alpha_ == 0.0) {
    parts.value = 0.5 * log_det + 0.5 * inv_n * quad.sum();
    parts.grad_coef = -inv_n * (u.transpose() * design_);
    parts.grad_sigma = 0.5 * prec - (0.5 * inv_n / h_) * (u.transpose() * u);
  } else {
    const double s = std::exp(-0.5 * alpha_ * log_det);
    const double c1 = std::pow(1.0 + alpha_, -0.5 * d_);
    const double c2 = 1.0 + 1.0 / alpha_;
    const Vector e = (-0.5 * alpha_ * quad.array()).exp();
    const double e_mean = e.sum() * inv_n;

    parts.value = c1 * s - c2 * s * e_mean;
    parts.grad_coef =
        -(1.0 + alpha_) * s * inv_n * (u.transpose() * (e.asDiagonal() * design_));
    parts.grad_sigma =
        -0.5 * alpha_ * s * c1 * prec +
        c2 * s * (0.5 * alpha_ * e_mean * prec -
                  (0.5 * alpha_ * inv_n / h_) * (u.transpose() * (e.asDiagonal() * u)));
  }
  parts.finite = std::isfinite(parts.value) && parts.grad_coef.allFinite() &&
                 parts.grad_sigma.allFinite();
  return parts;
}

namespace {

Vector sym_grad_to_vech(const Matrix& g) {
  const int d = static_cast<int>(g.rows());
  Vector out(vech_size(d));
  int idx = 0;
  for (int c = 0; c < d; ++c)
    for (int r = c; r < d; ++r)
      out(idx++) = (r == c) ? g(r, r) : g(r, c) + g(c, r);
  return out;
}

Vector coef_grad_to_beta(const Matrix& g) {
  const int d = static_cast<int>(g.rows());
  Vector out(d * (d + 1));
  int idx = 0;
  for (int c = 0; c < d + 1; ++c)
    for (int r = 0; r < d; ++r) out(idx++) = g(r, c);
  return out;
}

}  // namespace

ObjectiveValue ObjectiveEvaluator::evaluate(const DiffusionParams& params) const {
  if (params.dim() != d_)
    throw std::invalid_argument("objective: parameter dimension mismatch");
  const Parts parts = eval_parts(params.drift, params.sigma);
  ObjectiveValue out;
  out.value = parts.value;
  out.grad_beta = coef_grad_to_beta(parts.grad_coef);
  out.grad_vech_sigma = sym_grad_to_vech(parts.grad_sigma);
  return out;
}

Vector ObjectiveEvaluator::pack_transformed(const DiffusionParams& params) {
  const Vector beta = pack_beta(params.drift);
  const Vector ell = spd_to_log_chol(params.sigma);
  Vector x(beta.size() + ell.size());
  x << beta, ell;
  return x;
}

DiffusionParams ObjectiveEvaluator::unpack_transformed(const Vector& x) const {
  const int p = beta_size();
  DriftAffine drift = unpack_beta(x.head(p), d_);
  SpdMatrix sigma = spd_from_log_chol(x.tail(vech_size(d_)));
  return DiffusionParams{std::move(drift), std::move(sigma)};
}

double ObjectiveEvaluator::eval_transformed(const Vector& x, Vector& grad) const {
  const int p = beta_size();
  const int m = vech_size(d_);
  grad.resize(p + m);

  if (!x.allFinite()) return std::numeric_limits<double>::quiet_NaN();
  // Extreme trial points can overflow the SPD reconstruction; report them as
  // NaN so the line search backtracks instead of aborting the fit.
  std::optional<SpdMatrix> sigma;
  try {
    sigma.emplace(spd_from_log_chol(x.tail(m)));
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const DriftAffine drift = unpack_beta(x.head(p), d_);
  const Parts parts = eval_parts(drift, *sigma);
  if (!parts.finite) return std::numeric_limits<double>::quiet_NaN();

  grad.head(p) = coef_grad_to_beta(parts.grad_coef);

  // Chain rule through Sigma = L L^T: for the lower-triangle parameter at
  // (r, c), dV/dl_rc = 2 (G L)_rc, times L_rr on the diagonal (log scale).
  const Matrix gl = 2.0 * (parts.grad_sigma * sigma->chol_lower());
  int idx = p;
  for (int c = 0; c < d_; ++c)
    for (int r = c; r < d_; ++r)
      grad(idx++) = (r == c) ? gl(r, c) * sigma->chol_lower()(r, c) : gl(r, c);
  return parts.value;
}

ObjectiveValue objective(const SamplePath& path, const DiffusionParams& params,
                         double alpha) {
  ObjectiveEvaluator eval(path, alpha);
  return eval.evaluate(params);
}

Vector gradient_beta(const SamplePath& path, const DiffusionParams& params,
                     double alpha) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("gradient_beta: alpha must be > 0");
  return objective(path, params, alpha).grad_beta;
}

Vector gradient_vech_sigma(const SamplePath& path,
                           const DiffusionParams& params, double alpha) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("gradient_vech_sigma: alpha must be > 0");
  return objective(path, params, alpha).grad_vech_sigma;
}

}  // namespace mdpde
