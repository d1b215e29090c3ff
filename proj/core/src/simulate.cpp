#include "mdpde/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <vector>

#include "mdpde/rng.hpp"

namespace mdpde {

void DriftAffine::validate() const {
  if (B.rows() != B.cols() || B.rows() != b.size())
    throw std::invalid_argument("DriftAffine: B must be d x d and b length d");
  if (!B.allFinite() || !b.allFinite())
    throw std::invalid_argument("DriftAffine: parameters must be finite");
}

void SamplePath::validate() const {
  if (n_increments() < 1) throw std::invalid_argument("SamplePath: need n >= 1");
  if (!(h > 0.0)) throw std::invalid_argument("SamplePath: need h > 0");
  if (!points.allFinite())
    throw std::invalid_argument("SamplePath: non-finite observations");
}

double step_size(long n) {
  if (n < 1) throw std::invalid_argument("step_size: n must be >= 1");
  return std::pow(static_cast<double>(n), -0.55);
}

SamplePath simulate_path(const DriftAffine& drift, const Matrix& sigma,
                         const Vector& x0, long n, double h,
                         std::uint64_t seed) {
  drift.validate();
  const int d = drift.dim();
  if (n < 1) throw std::invalid_argument("simulate_path: n must be >= 1");
  if (!(h > 0.0)) throw std::invalid_argument("simulate_path: h must be > 0");
  if (x0.size() != d) throw std::invalid_argument("simulate_path: x0 has wrong dimension");
  if (sigma.rows() != d || sigma.cols() != d)
    throw std::invalid_argument("simulate_path: sigma has wrong dimension");

  const bool zero_noise = sigma.isZero(0.0);
  Matrix lambda = Matrix::Zero(d, d);
  if (!zero_noise) lambda = sym_sqrt(SpdMatrix(sigma));

  SamplePath path;
  path.h = h;
  path.points.resize(n + 1, d);
  path.points.row(0) = x0;

  Rng rng(seed);
  const double sqrt_h = std::sqrt(h);
  Vector x = x0;
  Vector z(d);
  for (long i = 1; i <= n; ++i) {
    x += drift.eval(x) * h;
    if (!zero_noise) {
      for (int j = 0; j < d; ++j) z(j) = rng.next_normal();
      x += sqrt_h * (lambda * z);
    }
    if (!x.allFinite())
      throw SimulationDiverged(static_cast<int>(i),
                               "simulate_path: non-finite state at step " +
                                   std::to_string(i));
    path.points.row(i) = x;
  }
  return path;
}

SamplePath contaminate(const SamplePath& path, const ContaminationSpec& spec) {
  path.validate();
  if (spec.eps < 0.0 || spec.eps >= 1.0)
    throw std::invalid_argument("contaminate: eps must be in [0,1)");
  if (spec.kappa < 0.0)
    throw std::invalid_argument("contaminate: kappa must be >= 0");

  SamplePath out = path;
  const long total = path.points.rows();
  const long m = std::llround(spec.eps * static_cast<double>(total));
  if (m == 0 || spec.kappa == 0.0) return out;

  Rng rng(spec.rng_seed);
  std::vector<long> idx(total);
  std::iota(idx.begin(), idx.end(), 0L);
  for (long j = 0; j < m; ++j) {
    const long pick = j + static_cast<long>(rng.next_below(total - j));
    std::swap(idx[j], idx[pick]);
  }
  std::sort(idx.begin(), idx.begin() + m);

  const int d = path.dim();
  for (long j = 0; j < m; ++j) {
    for (int c = 0; c < d; ++c)
      out.points(idx[j], c) += spec.kappa * rng.next_normal();
  }
  return out;
}

namespace {

void append_g17(std::string& buf, double v) {
  char tmp[40];
  std::snprintf(tmp, sizeof tmp, "%.17g", v);
  buf += tmp;
}

}  // namespace

void write_path_csv(const SamplePath& path, std::ostream& out) {
  const int d = path.dim();
  std::string line = "t";
  for (int c = 0; c < d; ++c) line += ",x" + std::to_string(c + 1);
  out << line << '\n';
  for (long i = 0; i < path.points.rows(); ++i) {
    line.clear();
    append_g17(line, static_cast<double>(i) * path.h);
    for (int c = 0; c < d; ++c) {
      line += ',';
      append_g17(line, path.points(i, c));
    }
    out << line << '\n';
  }
}

void write_path_csv_file(const SamplePath& path, const std::string& filename) {
  std::ofstream out(filename);
  if (!out) throw std::runtime_error("cannot open " + filename + " for writing");
  write_path_csv(path, out);
  if (!out.good()) throw std::runtime_error("write failed for " + filename);
}

SamplePath read_path_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("path CSV: missing header");
  int d = 0;
  for (char ch : header)
    if (ch == ',') ++d;
  if (d < 1 || header.substr(0, 1) != "t")
    throw std::runtime_error("path CSV: expected header t,x1,...,xd");

  std::vector<double> times;
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      const double v = std::stod(cell);
      if (col == 0)
        times.push_back(v);
      else
        values.push_back(v);
      ++col;
    }
    if (col != d + 1) throw std::runtime_error("path CSV: ragged row");
  }
  const long rows = static_cast<long>(times.size());
  if (rows < 2) throw std::runtime_error("path CSV: need at least two rows");

  const double h = times[1] - times[0];
  if (!(h > 0.0)) throw std::runtime_error("path CSV: non-increasing time column");
  for (long i = 1; i < rows; ++i) {
    const double expected = times[0] + static_cast<double>(i) * h;
    if (std::fabs(times[i] - expected) > 1e-9 * std::max(1.0, std::fabs(expected)))
      throw std::runtime_error("path CSV: time column is not equally spaced");
  }

  SamplePath path;
  path.h = h;
  path.points.resize(rows, d);
  for (long i = 0; i < rows; ++i)
    for (int c = 0; c < d; ++c) path.points(i, c) = values[i * d + c];
  path.validate();
  return path;
}

SamplePath read_path_csv_file(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw std::runtime_error("cannot open " + filename);
  return read_path_csv(in);
}

}  // namespace mdpde
