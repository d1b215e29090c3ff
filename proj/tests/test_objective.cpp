#include <doctest.h>

#include <cmath>
#include <random>

#include "mdpde/objective.hpp"
#include "mdpde/simulate.hpp"

using namespace mdpde;

namespace {

std::mt19937_64 test_rng(2718);

Matrix random_spd(int d, double lo = 0.3, double hi = 3.0) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(std::log(lo), std::log(hi));
  Matrix a(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) a(r, c) = normal(test_rng);
  const Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ();
  Vector eigs(d);
  for (int i = 0; i < d; ++i) eigs(i) = std::exp(unif(test_rng));
  return symmetrize(q * eigs.asDiagonal() * q.transpose());
}

DriftAffine random_drift(int d) {
  std::normal_distribution<double> normal(0.0, 0.5);
  DriftAffine drift;
  drift.B.resize(d, d);
  drift.b.resize(d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) drift.B(r, c) = normal(test_rng);
    drift.B(r, r) -= 0.8;  // keep the simulated path stable
    drift.b(r) = normal(test_rng);
  }
  return drift;
}

SamplePath random_path(int d, long n, std::uint64_t seed) {
  return simulate_path(random_drift(d), random_spd(d), Vector::Zero(d), n,
                       step_size(n), seed);
}

// Central finite differences of the objective value in beta and vech(Sigma).
ObjectiveValue fd_gradient(const SamplePath& path, const DiffusionParams& params,
                           double alpha) {
  ObjectiveValue out;
  out.value = objective(path, params, alpha).value;
  const int d = params.dim();
  const Vector beta = pack_beta(params.drift);
  out.grad_beta.resize(beta.size());
  for (long s = 0; s < beta.size(); ++s) {
    const double delta = 1e-6 * std::max(1.0, std::fabs(beta(s)));
    Vector up = beta, dn = beta;
    up(s) += delta;
    dn(s) -= delta;
    const double f_up =
        objective(path, {unpack_beta(up, d), params.sigma}, alpha).value;
    const double f_dn =
        objective(path, {unpack_beta(dn, d), params.sigma}, alpha).value;
    out.grad_beta(s) = (f_up - f_dn) / (2.0 * delta);
  }
  const auto pairs = vech_pairs(d);
  out.grad_vech_sigma.resize(static_cast<long>(pairs.size()));
  for (size_t j = 0; j < pairs.size(); ++j) {
    const Matrix dir = basis_S(pairs[j].first, pairs[j].second, d);
    const double delta = 1e-6;
    const double f_up =
        objective(path,
                  {params.drift, SpdMatrix(params.sigma.matrix() + delta * dir)},
                  alpha)
            .value;
    const double f_dn =
        objective(path,
                  {params.drift, SpdMatrix(params.sigma.matrix() - delta * dir)},
                  alpha)
            .value;
    out.grad_vech_sigma(j) = (f_up - f_dn) / (2.0 * delta);
  }
  return out;
}

double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1e-12, b.norm());
}

}  // namespace

TEST_CASE("residuals") {
  DriftAffine drift;
  drift.B = (Matrix(2, 2) << -0.6, -0.2, 0.1, -0.4).finished();
  drift.b = (Vector(2) << 2.0, 1.0).finished();

  // Noise-free simulation with the same parameters inverts to rounding.
  const auto clean = simulate_path(drift, Matrix::Zero(2, 2), Vector::Zero(2),
                                   20, 0.05, 1);
  CHECK(residuals(clean, drift).cwiseAbs().maxCoeff() < 1e-13);

  // Zero drift: residuals are the raw increments.
  DriftAffine none;
  none.B = Matrix::Zero(2, 2);
  none.b = Vector::Zero(2);
  const auto path = random_path(2, 30, 7);
  const Matrix incr = path.points.bottomRows(30) - path.points.topRows(30);
  CHECK((residuals(path, none) - incr).cwiseAbs().maxCoeff() == 0.0);

  // Hand-computed single increment.
  SamplePath tiny;
  tiny.h = 0.5;
  tiny.points = (Matrix(2, 2) << 0.0, 0.0, 1.0, 1.0).finished();
  DriftAffine intercept;
  intercept.B = Matrix::Zero(2, 2);
  intercept.b = Vector::Ones(2);
  const Matrix r = residuals(tiny, intercept);
  CHECK(r(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("single zero residual evaluates to the closed-form per-term value") {
  SamplePath path;
  path.h = 0.1;
  path.points = Matrix::Zero(2, 2);  // X_1 = X_0, so R_1 = 0 with zero drift
  DriftAffine none;
  none.B = Matrix::Zero(2, 2);
  none.b = Vector::Zero(2);
  const DiffusionParams params{none, SpdMatrix(Matrix::Identity(2, 2))};
  const auto value = objective(path, params, 1.0);
  CHECK(value.value == doctest::Approx(-1.5).epsilon(1e-14));
  CHECK(value.grad_beta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("analytic gradients match finite differences") {
  std::uniform_real_distribution<double> alpha_dist(0.05, 1.0);
  int instance = 0;
  for (int d = 1; d <= 3; ++d) {
    for (int trial = 0; trial < 12; ++trial) {
      const auto path = random_path(d, 40, 100 + instance);
      const DiffusionParams params{random_drift(d), SpdMatrix(random_spd(d))};
      const double alpha = alpha_dist(test_rng);
      const auto analytic = objective(path, params, alpha);
      const auto fd = fd_gradient(path, params, alpha);
      CHECK(rel_err(analytic.grad_beta, fd.grad_beta) < 1e-6);
      CHECK(rel_err(analytic.grad_vech_sigma, fd.grad_vech_sigma) < 1e-6);
      CHECK(gradient_beta(path, params, alpha) == analytic.grad_beta);
      CHECK(gradient_vech_sigma(path, params, alpha) == analytic.grad_vech_sigma);
      ++instance;
    }
  }
}

TEST_CASE("alpha=0 gradients match finite differences too") {
  for (int d = 1; d <= 3; ++d) {
    const auto path = random_path(d, 40, 55 + d);
    const DiffusionParams params{random_drift(d), SpdMatrix(random_spd(d))};
    const auto analytic = objective(path, params, 0.0);
    const auto fd = fd_gradient(path, params, 0.0);
    CHECK(rel_err(analytic.grad_beta, fd.grad_beta) < 1e-6);
    CHECK(rel_err(analytic.grad_vech_sigma, fd.grad_vech_sigma) < 1e-6);
  }
}

TEST_CASE("transformed-coordinate gradient matches finite differences") {
  const auto path = random_path(2, 40, 321);
  const ObjectiveEvaluator eval(path, 0.4);
  const DiffusionParams params{random_drift(2), SpdMatrix(random_spd(2))};
  const Vector x = ObjectiveEvaluator::pack_transformed(params);
  Vector grad;
  const double f0 = eval.eval_transformed(x, grad);
  CHECK(std::isfinite(f0));
  Vector fd(x.size());
  Vector scratch;
  for (long i = 0; i < x.size(); ++i) {
    const double delta = 1e-6 * std::max(1.0, std::fabs(x(i)));
    Vector up = x, dn = x;
    up(i) += delta;
    dn(i) -= delta;
    fd(i) = (eval.eval_transformed(up, scratch) -
             eval.eval_transformed(dn, scratch)) /
            (2.0 * delta);
  }
  CHECK(rel_err(grad, fd) < 1e-6);
}

TEST_CASE("d=1 gradients agree with an independently coded scalar expression") {
  const auto path = random_path(1, 60, 17);
  const double beta1 = -0.7, beta2 = 0.3, v = 0.8, alpha = 0.35;
  DriftAffine drift;
  drift.B = (Matrix(1, 1) << beta1).finished();
  drift.b = (Vector(1) << beta2).finished();
  const DiffusionParams params{drift, SpdMatrix((Matrix(1, 1) << v).finished())};
  const auto got = objective(path, params, alpha);

  const double h = path.h;
  const long n = path.n_increments();
  double g_b1 = 0.0, g_b2 = 0.0, g_v = 0.0;
  const double front = std::pow(1.0 + alpha, -0.5);
  for (long i = 0; i < n; ++i) {
    const double x = path.points(i, 0);
    const double r = path.points(i + 1, 0) - x - (beta1 * x + beta2) * h;
    const double e = std::exp(-0.5 * alpha * r * r / (h * v));
    const double sv = std::pow(v, -0.5 * alpha);
    const double common = (1.0 + 1.0 / alpha) * sv * e;
    g_b1 += common * (alpha / h) * (-h * x) * r / v;
    g_b2 += common * (alpha / h) * (-h) * r / v;
    g_v += -0.5 * alpha * front * sv / v +
           common * (0.5 * alpha / v - 0.5 * alpha * r * r / (h * v * v));
  }
  const double dn = static_cast<double>(n);
  CHECK(got.grad_beta(0) == doctest::Approx(g_b1 / dn).epsilon(1e-12));
  CHECK(got.grad_beta(1) == doctest::Approx(g_b2 / dn).epsilon(1e-12));
  CHECK(got.grad_vech_sigma(0) == doctest::Approx(g_v / dn).epsilon(1e-12));
}

TEST_CASE("alpha=0 branch equals the Gaussian likelihood up to a constant") {
  const auto path = random_path(2, 80, 8);
  const long n = path.n_increments();
  const double h = path.h;

  auto gaussian_nll = [&](const DiffusionParams& params) {
    const Matrix r = residuals(path, params.drift);
    const Matrix prec = params.sigma.inverse();
    double total = 0.0;
    for (long i = 0; i < n; ++i) {
      const Vector ri = r.row(i).transpose();
      total += 0.5 * (params.sigma.log_det() + 2.0 * std::log(2.0 * M_PI) +
                      2.0 * std::log(h)) +
               0.5 * ri.dot(prec * ri) / h;
    }
    return total / static_cast<double>(n);
  };

  const DiffusionParams a{random_drift(2), SpdMatrix(random_spd(2))};
  const DiffusionParams b{random_drift(2), SpdMatrix(random_spd(2))};
  const double lhs = objective(path, a, 0.0).value - objective(path, b, 0.0).value;
  const double rhs = gaussian_nll(a) - gaussian_nll(b);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("huge sigma sends the contrast to zero") {
  const auto path = random_path(2, 50, 9);
  DriftAffine none;
  none.B = Matrix::Zero(2, 2);
  none.b = Vector::Zero(2);
  const Matrix sigma_star = random_spd(2);
  const DiffusionParams params{none, SpdMatrix(1e8 * sigma_star)};
  const auto value = objective(path, params, 1.0);
  CHECK(std::fabs(value.value) < 1e-3);
}

TEST_CASE("objective is invariant under re-symmetrization of sigma") {
  const auto path = random_path(2, 50, 10);
  const DiffusionParams params{random_drift(2), SpdMatrix(random_spd(2))};
  Matrix skewed = params.sigma.matrix();
  skewed(0, 1) += 1e-3;  // symmetrize() restores the symmetric part
  skewed(1, 0) -= 1e-3;
  const DiffusionParams mirrored{params.drift, SpdMatrix(skewed)};
  CHECK(objective(path, params, 0.5).value ==
        objective(path, mirrored, 0.5).value);
}

TEST_CASE("per-term values respect the closed-form lower bound") {
  const auto path = random_path(2, 50, 12);
  const DiffusionParams params{random_drift(2), SpdMatrix(random_spd(2))};
  const double alpha = 0.6;
  const double s = std::exp(-0.5 * alpha * params.sigma.log_det());
  const double bound = std::pow(1.0 + alpha, -1.0) * s - (1.0 + 1.0 / alpha) * s;
  for (long i = 0; i < path.n_increments(); ++i) {
    SamplePath sub;
    sub.h = path.h;
    sub.points = path.points.middleRows(i, 2);
    const double term = objective(sub, params, alpha).value;
    CHECK(term >= bound - 1e-12);
  }
}

TEST_CASE("sigma gradient transforms with the data-scaling chain rule") {
  DriftAffine none;
  none.B = Matrix::Zero(2, 2);
  none.b = Vector::Zero(2);
  SamplePath path = random_path(2, 60, 14);
  const Matrix sigma_star = random_spd(2);
  const double alpha = 0.3, c = 2.0;

  const Vector base =
      objective(path, {none, SpdMatrix(sigma_star)}, alpha).grad_vech_sigma;
  SamplePath scaled = path;
  scaled.points *= c;
  const Vector grown =
      objective(scaled, {none, SpdMatrix(c * c * sigma_star)}, alpha)
          .grad_vech_sigma;
  const double factor = std::pow(c, -2.0 * alpha - 2.0);  // d = 2
  CHECK((grown - factor * base).norm() / base.norm() < 1e-8);
}

TEST_CASE("invalid arguments are rejected") {
  const auto path = random_path(2, 20, 15);
  const DiffusionParams params{random_drift(2), SpdMatrix(random_spd(2))};
  CHECK_THROWS_AS(objective(path, params, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(gradient_beta(path, params, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gradient_vech_sigma(path, params, 0.0), std::invalid_argument);
}
