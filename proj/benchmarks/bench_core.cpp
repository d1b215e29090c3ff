// Microbenchmarks for the hot paths: contrast evaluation, gradient-carrying
// fits, path simulation, and the closed-form inference matrices.

#include <benchmark/benchmark.h>

#include "mdpde/estimator.hpp"
#include "mdpde/inference.hpp"
#include "mdpde/simulate.hpp"

namespace {

mdpde::SamplePath make_path(long n) {
  mdpde::DriftAffine drift;
  drift.B = (mdpde::Matrix(2, 2) << -0.6, -0.2, 0.1, -0.4).finished();
  drift.b = (mdpde::Vector(2) << 2.0, 1.0).finished();
  const mdpde::Matrix sigma =
      (mdpde::Matrix(2, 2) << 1.0, 0.5, 0.5, 0.7).finished();
  return mdpde::simulate_path(drift, sigma, mdpde::Vector::Zero(2), n,
                              mdpde::step_size(n), 7);
}

void BM_SimulatePath(benchmark::State& state) {
  const long n = state.range(0);
  mdpde::DriftAffine drift;
  drift.B = (mdpde::Matrix(2, 2) << -0.6, -0.2, 0.1, -0.4).finished();
  drift.b = (mdpde::Vector(2) << 2.0, 1.0).finished();
  const mdpde::Matrix sigma =
      (mdpde::Matrix(2, 2) << 1.0, 0.5, 0.5, 0.7).finished();
  for (auto _ : state) {
    auto path = mdpde::simulate_path(drift, sigma, mdpde::Vector::Zero(2), n,
                                     mdpde::step_size(n), 7);
    benchmark::DoNotOptimize(path.points.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_SimulatePath)->Range(256, 4096)->Complexity(benchmark::oN);

void BM_ObjectiveGradient(benchmark::State& state) {
  const auto path = make_path(state.range(0));
  const mdpde::ObjectiveEvaluator eval(path, 0.3);
  const auto start = mdpde::ols_init(path);
  const mdpde::Vector x0 = mdpde::ObjectiveEvaluator::pack_transformed(start);
  mdpde::Vector grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval.eval_transformed(x0, grad));
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ObjectiveGradient)->Range(256, 4096)->Complexity(benchmark::oN);

void BM_Fit(benchmark::State& state) {
  const auto path = make_path(state.range(0));
  mdpde::MdpdeConfig cfg;
  cfg.alpha = state.range(1) / 10.0;
  for (auto _ : state) {
    auto res = mdpde::fit(path, cfg);
    benchmark::DoNotOptimize(res.objective);
  }
}
BENCHMARK(BM_Fit)->Args({1000, 0})->Args({1000, 3})->Args({4000, 3});

void BM_XiEll(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  mdpde::Matrix sigma = mdpde::Matrix::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) sigma(i, j) += 0.3 / (1.0 + std::abs(i - j));
  const mdpde::SpdMatrix spd(sigma);
  for (auto _ : state) {
    auto [xi, ell] = mdpde::xi_ell_matrices(spd, 0.3);
    benchmark::DoNotOptimize(xi.data());
    benchmark::DoNotOptimize(ell.data());
  }
}
BENCHMARK(BM_XiEll)->DenseRange(2, 6);

}  // namespace

BENCHMARK_MAIN();
