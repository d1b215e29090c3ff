#include "mdpde/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <thread>

#include "mdpde/config_file.hpp"
#include "mdpde/estimator.hpp"
#include "mdpde/rng.hpp"
#include "mdpde/simulate.hpp"
#include "mdpde/version.hpp"

namespace fs = std::filesystem;

namespace mdpde {

void ExperimentConfig::validate() const {
  if (n_grid.empty() || eps_grid.empty() || alpha_grid.empty())
    throw std::invalid_argument("ExperimentConfig: grids must be nonempty");
  for (long n : n_grid)
    if (n < 2) throw std::invalid_argument("ExperimentConfig: n must be >= 2");
  for (double e : eps_grid)
    if (e < 0.0 || e >= 1.0)
      throw std::invalid_argument("ExperimentConfig: eps must be in [0,1)");
  for (double a : alpha_grid)
    if (a < 0.0) throw std::invalid_argument("ExperimentConfig: alpha must be >= 0");
  if (kappa < 0.0) throw std::invalid_argument("ExperimentConfig: kappa must be >= 0");
  if (reps < 1) throw std::invalid_argument("ExperimentConfig: reps must be >= 1");
  const int d = dim();
  if (B_true.rows() != d || B_true.cols() != d || sigma_true.rows() != d ||
      sigma_true.cols() != d || x0.size() != d)
    throw std::invalid_argument("ExperimentConfig: parameter shapes disagree");
  if (!is_spd(sigma_true))
    throw std::invalid_argument("ExperimentConfig: sigma_true must be SPD");
}

std::uint64_t replication_seed(std::uint64_t base_seed, long n, int eps_index,
                               int rep) {
  std::uint64_t s = mix64(base_seed + 0x9E3779B97F4A7C15ULL);
  s = mix64(s ^ static_cast<std::uint64_t>(n));
  s = mix64(s ^ static_cast<std::uint64_t>(eps_index));
  s = mix64(s ^ static_cast<std::uint64_t>(rep));
  return s;
}

int worker_count() {
  if (const char* env = std::getenv("MDPDE_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

// Strided static partition; each index is handled by exactly one worker and
// writes only its own slot, so results do not depend on scheduling.
void parallel_for(int count, const std::function<void(int)>& body) {
  const int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct RepOutcome {
  bool ok = false;
  Matrix B;
  Vector b;
  Matrix S;
};

}  // namespace

CellSummary run_cell(const ExperimentConfig& cfg, long n, double eps,
                     double alpha) {
  cfg.validate();
  const auto eps_it = std::find(cfg.eps_grid.begin(), cfg.eps_grid.end(), eps);
  if (eps_it == cfg.eps_grid.end())
    throw std::invalid_argument("run_cell: eps is not in the configured grid");
  const int eps_index = static_cast<int>(eps_it - cfg.eps_grid.begin());
  const int d = cfg.dim();
  const double h = step_size(n);
  const DriftAffine drift_true{cfg.B_true, cfg.b_true};

  std::vector<RepOutcome> outcomes(cfg.reps);
  parallel_for(cfg.reps, [&](int rep) {
    const std::uint64_t seed = replication_seed(cfg.base_seed, n, eps_index, rep);
    RepOutcome& out = outcomes[rep];
    try {
      SamplePath path =
          simulate_path(drift_true, cfg.sigma_true, cfg.x0, n, h, mix64(seed ^ 1));
      if (eps > 0.0 && cfg.kappa > 0.0)
        path = contaminate(path, ContaminationSpec{eps, cfg.kappa, mix64(seed ^ 2)});
      MdpdeConfig fit_cfg;
      fit_cfg.alpha = alpha;
      const FitResult res = fit(path, fit_cfg);
      if (res.converged) {
        out.ok = true;
        out.B = res.params.drift.B;
        out.b = res.params.drift.b;
        out.S = res.params.sigma.matrix();
      }
    } catch (const std::exception&) {
      out.ok = false;
    }
  });

  CellSummary cell;
  cell.n = n;
  cell.eps = eps;
  cell.alpha = alpha;
  cell.reps = cfg.reps;
  cell.mean_B = Matrix::Zero(d, d);
  cell.rmse_B = Matrix::Zero(d, d);
  cell.mean_b = Vector::Zero(d);
  cell.rmse_b = Vector::Zero(d);
  cell.mean_S = Matrix::Zero(d, d);
  cell.rmse_S = Matrix::Zero(d, d);

  int ok_count = 0;
  for (const RepOutcome& out : outcomes) {
    if (!out.ok) {
      ++cell.failure_count;
      continue;
    }
    ++ok_count;
    cell.mean_B += out.B;
    cell.mean_b += out.b;
    cell.mean_S += out.S;
    cell.rmse_B += (out.B - cfg.B_true).array().square().matrix();
    cell.rmse_b += (out.b - cfg.b_true).array().square().matrix();
    cell.rmse_S += (out.S - cfg.sigma_true).array().square().matrix();
  }
  const double denom = ok_count > 0
                           ? static_cast<double>(ok_count)
                           : std::numeric_limits<double>::quiet_NaN();
  cell.mean_B /= denom;
  cell.mean_b /= denom;
  cell.mean_S /= denom;
  cell.rmse_B = (cell.rmse_B / denom).cwiseSqrt();
  cell.rmse_b = (cell.rmse_b / denom).cwiseSqrt();
  cell.rmse_S = (cell.rmse_S / denom).cwiseSqrt();
  return cell;
}

namespace {

void append_g17(std::string& buf, double v) {
  char tmp[40];
  std::snprintf(tmp, sizeof tmp, "%.17g", v);
  buf += tmp;
}

void append_matrix_row_major(std::string& buf, const Matrix& m) {
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) {
      buf += ',';
      append_g17(buf, m(r, c));
    }
}

void append_vector(std::string& buf, const Vector& v) {
  for (long r = 0; r < v.size(); ++r) {
    buf += ',';
    append_g17(buf, v(r));
  }
}

}  // namespace

std::string csv_header(int d) {
  std::string h = "epsilon,alpha";
  auto names = [&](const std::string& prefix) {
    for (int r = 1; r <= d; ++r)
      for (int c = 1; c <= d; ++c)
        h += "," + prefix + std::to_string(r) + std::to_string(c);
  };
  names("B");
  for (int r = 1; r <= d; ++r) h += ",b" + std::to_string(r);
  names("S");
  names("rmse_B");
  for (int r = 1; r <= d; ++r) h += ",rmse_b" + std::to_string(r);
  names("rmse_S");
  h += ",failure_count";
  return h;
}

std::string csv_row(const CellSummary& cell) {
  std::string row;
  append_g17(row, cell.eps);
  row += ',';
  append_g17(row, cell.alpha);
  append_matrix_row_major(row, cell.mean_B);
  append_vector(row, cell.mean_b);
  append_matrix_row_major(row, cell.mean_S);
  append_matrix_row_major(row, cell.rmse_B);
  append_vector(row, cell.rmse_b);
  append_matrix_row_major(row, cell.rmse_S);
  row += ',' + std::to_string(cell.failure_count);
  return row;
}

std::vector<std::string> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);

  std::vector<double> eps_sorted = cfg.eps_grid;
  std::sort(eps_sorted.begin(), eps_sorted.end());
  std::vector<double> alpha_sorted = cfg.alpha_grid;
  std::sort(alpha_sorted.begin(), alpha_sorted.end());

  std::vector<std::string> written;
  auto cleanup = [&written] {
    for (const std::string& f : written) {
      std::error_code ec;
      fs::remove(f, ec);
    }
  };

  try {
    for (long n : cfg.n_grid) {
      const std::string name =
          (fs::path(cfg.out_dir) / ("mdpde_all_n" + std::to_string(n) + ".csv"))
              .string();
      const std::string tmp = name + ".tmp";
      {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        written.push_back(tmp);
        out << csv_header(cfg.dim()) << '\n';
        for (double eps : eps_sorted)
          for (double alpha : alpha_sorted)
            out << csv_row(run_cell(cfg, n, eps, alpha)) << '\n';
        if (!out.good()) throw std::runtime_error("write failed for " + tmp);
      }
      fs::rename(tmp, name);
      written.back() = name;
    }

    const std::string meta =
        (fs::path(cfg.out_dir) / "run_metadata.json").string();
    std::ofstream out(meta);
    if (!out) throw std::runtime_error("cannot open " + meta + " for writing");
    written.push_back(meta);
    out << experiment_metadata_json(cfg) << '\n';
    if (!out.good()) throw std::runtime_error("write failed for " + meta);
  } catch (...) {
    cleanup();
    throw;
  }
  return written;
}

}  // namespace mdpde
