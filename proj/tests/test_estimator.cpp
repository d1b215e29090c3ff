#include <doctest.h>

#include <cmath>

#include "mdpde/estimator.hpp"
#include "mdpde/simulate.hpp"

using namespace mdpde;

namespace {

DriftAffine drift_true() {
  DriftAffine d;
  d.B = (Matrix(2, 2) << -0.6, -0.2, 0.1, -0.4).finished();
  d.b = (Vector(2) << 2.0, 1.0).finished();
  return d;
}

Matrix sigma_true() { return (Matrix(2, 2) << 1.0, 0.5, 0.5, 0.7).finished(); }

SamplePath clean_path(long n, std::uint64_t seed) {
  return simulate_path(drift_true(), sigma_true(), Vector::Zero(2), n,
                       step_size(n), seed);
}

// Closed-form Gaussian solution of the regression form: least squares for
// (B, b), residual covariance for Sigma.
DiffusionParams gaussian_mle(const SamplePath& path) {
  const long n = path.n_increments();
  const int d = path.dim();
  Matrix design(n, d + 1);
  design.leftCols(d) = path.points.topRows(n);
  design.col(d).setOnes();
  const Matrix response = path.points.bottomRows(n) - path.points.topRows(n);
  const Matrix coef =
      (design.transpose() * design).ldlt().solve(design.transpose() * response);
  DriftAffine drift;
  drift.B = coef.topRows(d).transpose() / path.h;
  drift.b = coef.row(d).transpose() / path.h;
  const Matrix resid = response - design * coef;
  return {drift, SpdMatrix((resid.transpose() * resid) /
                           (static_cast<double>(n) * path.h))};
}

}  // namespace

TEST_CASE("ols_init recovers a noise-free affine system") {
  const auto path = simulate_path(drift_true(), Matrix::Zero(2, 2),
                                  (Vector(2) << 1.0, -1.0).finished(), 50,
                                  0.05, 1);
  const auto init = ols_init(path);
  CHECK((init.drift.B - drift_true().B).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((init.drift.b - drift_true().b).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(is_spd(init.sigma.matrix()));  // floored to stay SPD
}

TEST_CASE("ols_init sigma is close on clean data") {
  const auto path = clean_path(2000, 7);
  const auto init = ols_init(path);
  CHECK((init.sigma.matrix() - sigma_true()).norm() / sigma_true().norm() < 0.10);
}

TEST_CASE("ols_init rejects rank-deficient designs") {
  SamplePath flat;
  flat.h = 0.1;
  flat.points = Matrix::Ones(20, 2);
  CHECK_THROWS_AS(ols_init(flat), InitializationError);
}

TEST_CASE("alpha=0 fit matches the closed-form Gaussian solution") {
  const auto path = clean_path(500, 11);
  MdpdeConfig cfg;
  cfg.alpha = 0.0;
  const FitResult res = fit(path, cfg);
  CHECK(res.converged);
  CHECK(res.iterations <= 3);
  const auto mle = gaussian_mle(path);
  CHECK((res.params.drift.B - mle.drift.B).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((res.params.drift.b - mle.drift.b).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((res.params.sigma.matrix() - mle.sigma.matrix()).norm() < 1e-6);
}

TEST_CASE("fit is deterministic and idempotent at the optimum") {
  const auto path = clean_path(400, 21);
  MdpdeConfig cfg;
  cfg.alpha = 0.3;
  const FitResult a = fit(path, cfg);
  const FitResult b = fit(path, cfg);
  CHECK(a.converged);
  CHECK((a.params.drift.B - b.params.drift.B).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.params.sigma.matrix() - b.params.sigma.matrix()).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(a.objective == b.objective);
  CHECK(a.grad_norm <= cfg.grad_tol);
  CHECK(is_spd(a.params.sigma.matrix()));

  MdpdeConfig warm = cfg;
  warm.init = a.params;
  const FitResult again = fit(path, warm);
  CHECK(again.iterations <= 1);
  CHECK((again.params.drift.B - a.params.drift.B).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((again.params.sigma.matrix() - a.params.sigma.matrix())
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("objective never increases from the start point") {
  const auto path = clean_path(300, 31);
  for (const double alpha : {0.0, 0.1, 0.5}) {
    MdpdeConfig cfg;
    cfg.alpha = alpha;
    const auto init = ols_init(path);
    const double f0 = objective(path, init, alpha).value;
    const FitResult res = fit(path, cfg);
    CHECK(res.objective <= f0 + 1e-14);
  }
}

TEST_CASE("tiny alpha matches the alpha=0 optimum") {
  const auto path = clean_path(300, 41);
  MdpdeConfig zero;
  zero.alpha = 0.0;
  MdpdeConfig tiny;
  tiny.alpha = 1e-8;
  const FitResult f0 = fit(path, zero);
  const FitResult f1 = fit(path, tiny);
  CHECK((f0.params.drift.B - f1.params.drift.B).cwiseAbs().maxCoeff() < 1e-4);
  CHECK((f0.params.drift.b - f1.params.drift.b).cwiseAbs().maxCoeff() < 1e-4);
  CHECK((f0.params.sigma.matrix() - f1.params.sigma.matrix())
            .cwiseAbs()
            .maxCoeff() < 1e-4);
}

TEST_CASE("the estimate moves continuously in alpha on clean data") {
  const auto path = clean_path(2000, 51);
  Vector prev;
  for (int k = 0; k <= 50; ++k) {
    MdpdeConfig cfg;
    cfg.alpha = 0.01 * k;
    const FitResult res = fit(path, cfg);
    REQUIRE(res.converged);
    Vector coords(10);
    coords << pack_beta(res.params.drift), vech(res.params.sigma.matrix());
    if (k > 0) CHECK((coords - prev).cwiseAbs().maxCoeff() < 0.05);
    prev = coords;
  }
}

TEST_CASE("contamination breaks alpha=0 and alpha=0.3 shrugs it off") {
  const long n = 1000;
  SamplePath path = clean_path(n, 61);
  path = contaminate(path, ContaminationSpec{0.10, 5.0, 62});

  MdpdeConfig robust;
  robust.alpha = 0.3;
  const FitResult good = fit(path, robust);
  CHECK(good.converged);
  CHECK((good.params.drift.B - drift_true().B).cwiseAbs().maxCoeff() < 0.5);
  CHECK((vech(good.params.sigma.matrix()) - vech(sigma_true()))
            .cwiseAbs()
            .maxCoeff() < 0.6);

  MdpdeConfig fragile;
  fragile.alpha = 0.0;
  const FitResult broken = fit(path, fragile);
  CHECK(broken.params.drift.B.cwiseAbs().maxCoeff() > 5.0);
}

TEST_CASE("multistart never returns a worse objective") {
  SamplePath path = clean_path(400, 71);
  path = contaminate(path, ContaminationSpec{0.05, 5.0, 72});
  MdpdeConfig single;
  single.alpha = 0.5;
  MdpdeConfig multi = single;
  multi.multistart = true;
  CHECK(fit(path, multi).objective <= fit(path, single).objective + 1e-14);
}

TEST_CASE("non-finite start raises NumericalFailure") {
  const auto path = clean_path(100, 81);
  MdpdeConfig cfg;
  cfg.alpha = 1.0;
  cfg.init =
      DiffusionParams{drift_true(), SpdMatrix(1e-300 * Matrix::Identity(2, 2))};
  CHECK_THROWS_AS(fit(path, cfg), NumericalFailure);
}

TEST_CASE("config validation") {
  MdpdeConfig cfg;
  cfg.alpha = -0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.alpha = 0.1;
  cfg.grad_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
