// Command-line front end: path simulation, single-path fitting with
// asymptotic inference, the full contamination study grid, and Wald tests
// against a null drift value.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdpde/config_file.hpp"
#include "mdpde/estimator.hpp"
#include "mdpde/experiment.hpp"
#include "mdpde/inference.hpp"
#include "mdpde/rng.hpp"
#include "mdpde/simulate.hpp"
#include "mdpde/version.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

json matrix_json(const mdpde::Matrix& m) {
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const mdpde::Vector& v) {
  json arr = json::array();
  for (long i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

mdpde::Vector vector_from_json(const json& j) {
  mdpde::Vector v(static_cast<long>(j.size()));
  for (long i = 0; i < v.size(); ++i) v(i) = j.at(i).get<double>();
  return v;
}

void write_text(const std::string& filename, const std::string& text) {
  if (filename.empty() || filename == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(filename);
  if (!out) throw std::runtime_error("cannot open " + filename + " for writing");
  out << text << '\n';
  if (!out.good()) throw std::runtime_error("write failed for " + filename);
}

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

struct SimulateArgs {
  long n = 1000;
  double h = 0.0;  // 0: use the n^{-0.55} schedule
  std::uint64_t seed = 1;
  double eps = 0.0;
  double kappa = 5.0;
  std::string config_file;
  std::string out = "path.csv";
};

int run_simulate(const SimulateArgs& args) {
  mdpde::ExperimentConfig cfg;
  if (!args.config_file.empty()) cfg = mdpde::load_config_file(args.config_file);
  const double h = args.h > 0.0 ? args.h : mdpde::step_size(args.n);
  const mdpde::DriftAffine drift{cfg.B_true, cfg.b_true};
  mdpde::SamplePath path = mdpde::simulate_path(
      drift, cfg.sigma_true, cfg.x0, args.n, h, mdpde::mix64(args.seed ^ 1));
  if (args.eps > 0.0 && args.kappa > 0.0)
    path = mdpde::contaminate(
        path, mdpde::ContaminationSpec{args.eps, args.kappa,
                                       mdpde::mix64(args.seed ^ 2)});
  mdpde::write_path_csv_file(path, args.out);
  std::cerr << "wrote " << args.out << " (n=" << args.n << ", h=" << h << ")\n";
  return kExitOk;
}

struct FitArgs {
  std::string path_csv;
  double alpha = 0.0;
  std::string beta_null_csv;
  std::string out;
};

int run_fit(const FitArgs& args) {
  const mdpde::SamplePath path = mdpde::read_path_csv_file(args.path_csv);
  mdpde::MdpdeConfig cfg;
  cfg.alpha = args.alpha;
  const mdpde::FitResult res = mdpde::fit(path, cfg);

  const mdpde::Vector beta_hat = mdpde::pack_beta(res.params.drift);
  mdpde::Vector beta_null = beta_hat;
  if (!args.beta_null_csv.empty()) {
    const auto values = parse_csv_doubles(args.beta_null_csv);
    if (static_cast<long>(values.size()) != beta_hat.size())
      throw CLI::ValidationError("--beta-null needs " +
                                 std::to_string(beta_hat.size()) + " values");
    beta_null = Eigen::Map<const mdpde::Vector>(values.data(), values.size());
  }
  const mdpde::InferenceReport rep =
      mdpde::make_inference_report(path, res.params, args.alpha, beta_null);

  json j;
  j["alpha"] = args.alpha;
  j["n"] = path.n_increments();
  j["h"] = path.h;
  j["fit"] = {
      {"converged", res.converged}, {"iterations", res.iterations},
      {"objective", res.objective}, {"grad_norm", res.grad_norm},
      {"B", matrix_json(res.params.drift.B)},
      {"b", vector_json(res.params.drift.b)},
      {"sigma", matrix_json(res.params.sigma.matrix())},
      {"beta", vector_json(beta_hat)},
  };
  j["inference"] = json::parse(rep.to_json());
  write_text(args.out, j.dump(2));
  return kExitOk;
}

struct InferArgs {
  std::string fit_file;
  std::string beta_null_csv;
  std::string out;
};

int run_infer(const InferArgs& args) {
  std::ifstream in(args.fit_file);
  if (!in) throw CLI::ValidationError("cannot open " + args.fit_file);
  json j;
  in >> j;

  const mdpde::Vector beta_hat = vector_from_json(j.at("fit").at("beta"));
  const long n = j.at("n").get<long>();
  const double h = j.at("h").get<double>();
  const json& sb = j.at("inference").at("sigma_beta");
  mdpde::Matrix sigma_beta(static_cast<long>(sb.size()),
                           static_cast<long>(sb.size()));
  for (long r = 0; r < sigma_beta.rows(); ++r)
    for (long c = 0; c < sigma_beta.cols(); ++c)
      sigma_beta(r, c) = sb.at(r).at(c).get<double>();

  mdpde::Vector beta_null = beta_hat;
  if (!args.beta_null_csv.empty()) {
    const auto values = parse_csv_doubles(args.beta_null_csv);
    if (static_cast<long>(values.size()) != beta_hat.size())
      throw CLI::ValidationError("--beta-null needs " +
                                 std::to_string(beta_hat.size()) + " values");
    beta_null = Eigen::Map<const mdpde::Vector>(values.data(), values.size());
  }

  const auto [stat, pvalue] =
      mdpde::wald_test(beta_hat, beta_null, sigma_beta, n, h);
  json out;
  out["wald_stat"] = stat;
  out["wald_df"] = beta_hat.size();
  out["wald_pvalue"] = pvalue;
  out["beta_null"] = vector_json(beta_null);
  write_text(args.out, out.dump(2));
  return kExitOk;
}

struct ExperimentArgs {
  std::string config_file;
  std::optional<long> n;
  std::optional<double> eps;
  std::optional<double> alpha;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

int run_experiment_cmd(const ExperimentArgs& args) {
  mdpde::ExperimentConfig cfg;
  if (!args.config_file.empty()) cfg = mdpde::load_config_file(args.config_file);
  if (args.n) cfg.n_grid = {*args.n};
  if (args.eps) cfg.eps_grid = {*args.eps};
  if (args.alpha) cfg.alpha_grid = {*args.alpha};
  if (args.reps) cfg.reps = *args.reps;
  if (args.seed) cfg.base_seed = *args.seed;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  const auto files = mdpde::run_experiment(cfg);
  for (const std::string& f : files) std::cerr << "wrote " << f << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust drift/diffusion estimation for discretely observed "
               "multivariate diffusions (minimum density power divergence)"};
  app.set_version_flag("--version", mdpde::kVersion);
  app.require_subcommand(1);

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "Simulate one path to CSV");
  sim->add_option("--n", sim_args.n, "Number of increments")->check(CLI::PositiveNumber);
  sim->add_option("--step", sim_args.h, "Step size (default: n^-0.55)");
  sim->add_option("--seed", sim_args.seed, "RNG seed");
  sim->add_option("--eps", sim_args.eps, "Contamination fraction in [0,1)");
  sim->add_option("--kappa", sim_args.kappa, "Contamination magnitude");
  sim->add_option("--config", sim_args.config_file, "Model parameters (JSON/TOML)");
  sim->add_option("--out", sim_args.out, "Output CSV file");

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a path CSV, emit JSON");
  fit_cmd->add_option("path", fit_args.path_csv, "Input path CSV")->required();
  fit_cmd->add_option("--alpha", fit_args.alpha, "Tuning parameter alpha >= 0")
      ->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--beta-null", fit_args.beta_null_csv,
                      "Comma-separated null drift for the Wald test");
  fit_cmd->add_option("--out", fit_args.out, "Output JSON file (default: stdout)");

  InferArgs infer_args;
  CLI::App* infer = app.add_subcommand("infer", "Wald test from a fit JSON");
  infer->add_option("--fit", infer_args.fit_file, "JSON produced by 'fit'")->required();
  infer->add_option("--beta-null", infer_args.beta_null_csv,
                    "Comma-separated null drift (default: the fitted value)");
  infer->add_option("--out", infer_args.out, "Output JSON file (default: stdout)");

  ExperimentArgs exp_args;
  CLI::App* exp = app.add_subcommand("experiment", "Run the simulation study grid");
  exp->add_option("--config", exp_args.config_file, "Config file (JSON/TOML)");
  exp->add_option("--n", exp_args.n, "Restrict to one sample size");
  exp->add_option("--eps", exp_args.eps, "Restrict to one contamination level");
  exp->add_option("--alpha", exp_args.alpha, "Restrict to one alpha");
  exp->add_option("--reps", exp_args.reps, "Replications per cell");
  exp->add_option("--seed", exp_args.seed, "Base seed");
  exp->add_option("--out", exp_args.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
    if (*sim) return run_simulate(sim_args);
    if (*fit_cmd) return run_fit(fit_args);
    if (*infer) return run_infer(infer_args);
    if (*exp) return run_experiment_cmd(exp_args);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const mdpde::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
