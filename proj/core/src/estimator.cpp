#include "mdpde/estimator.hpp"

#include <cmath>
#include <vector>

#include "mdpde/bfgs.hpp"

namespace mdpde {

void MdpdeConfig::validate() const {
  if (alpha < 0.0) throw std::invalid_argument("MdpdeConfig: alpha must be >= 0");
  if (max_iters < 1) throw std::invalid_argument("MdpdeConfig: max_iters must be >= 1");
  if (!(grad_tol > 0.0) || !(step_tol > 0.0))
    throw std::invalid_argument("MdpdeConfig: tolerances must be > 0");
}

DiffusionParams ols_init(const SamplePath& path) {
  path.validate();
  const long n = path.n_increments();
  const int d = path.dim();
  if (n < d + 2)
    throw InitializationError("ols_init: need at least d + 2 increments");

  Matrix design(n, d + 1);
  design.leftCols(d) = path.points.topRows(n);
  design.col(d).setOnes();
  const Matrix response =
      (path.points.bottomRows(n) - path.points.topRows(n)) / path.h;

  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < d + 1)
    throw InitializationError(
        "ols_init: rank-deficient design matrix; supply a user init");
  const Matrix coef = qr.solve(response);  // (d+1) x d

  DriftAffine drift;
  drift.B = coef.topRows(d).transpose();
  drift.b = coef.row(d).transpose();

  // Sigma from residuals of the increments: R_i = dX_i - (B x + b) h has
  // covariance Sigma h under the scheme, so Sigma = R'R / (n h).
  const Matrix resid = path.h * (response - design * coef);
  Matrix sigma_hat = (resid.transpose() * resid) / (static_cast<double>(n) * path.h);
  sigma_hat = symmetrize(sigma_hat);

  if (!is_spd(sigma_hat)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_hat);
    const double tr = sigma_hat.trace();
    const double floor = tr > 0.0 ? 1e-8 * tr / d : 1e-10;
    sigma_hat = es.eigenvectors() *
                es.eigenvalues().cwiseMax(floor).asDiagonal() *
                es.eigenvectors().transpose();
    sigma_hat = symmetrize(sigma_hat);
  }
  return DiffusionParams{std::move(drift), SpdMatrix(sigma_hat)};
}

namespace {

FitResult run_from(const ObjectiveEvaluator& eval, const Vector& x0,
                   const MdpdeConfig& cfg) {
  BfgsOptions opts;
  opts.max_iters = cfg.max_iters;
  opts.grad_tol = cfg.grad_tol;
  opts.step_tol = cfg.step_tol;
  const BfgsResult res = minimize_bfgs(
      [&](const Vector& x, Vector& g) { return eval.eval_transformed(x, g); },
      x0, opts);
  if (res.status == BfgsStatus::non_finite_start)
    throw NumericalFailure(res.iterations,
                           "fit: objective is not finite at the start point");
  return FitResult{eval.unpack_transformed(res.x), res.value, res.iterations,
                   res.converged, res.grad_norm};
}

}  // namespace

FitResult fit(const SamplePath& path, const MdpdeConfig& cfg) {
  cfg.validate();
  const ObjectiveEvaluator eval(path, cfg.alpha);
  const DiffusionParams start = cfg.init ? *cfg.init : ols_init(path);
  const Vector x0 = ObjectiveEvaluator::pack_transformed(start);

  FitResult best = run_from(eval, x0, cfg);
  if (!cfg.multistart) return best;

  const int p = eval.beta_size();
  const int m = vech_size(eval.dim());
  std::vector<Vector> starts;
  for (const double delta : {0.25, -0.25}) {
    Vector x = x0;
    x.head(p).array() += delta;
    starts.push_back(x);
  }
  for (const double delta : {0.5, -0.5}) {
    Vector x = x0;
    x.tail(m).array() += delta;
    starts.push_back(x);
  }
  for (const Vector& x : starts) {
    try {
      FitResult candidate = run_from(eval, x, cfg);
      if (candidate.objective < best.objective) best = std::move(candidate);
    } catch (const NumericalFailure&) {
      // a perturbed start may be infeasible; the OLS start already succeeded
    }
  }
  return best;
}

}  // namespace mdpde
