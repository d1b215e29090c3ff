#include "mdpde/matrix_utils.hpp"

#include <cmath>
#include <stdexcept>

namespace mdpde {

int vech_size(int d) {
  if (d < 1) throw std::invalid_argument("vech_size: dimension must be positive");
  return d * (d + 1) / 2;
}

int vech_dim_from_size(int m) {
  int d = static_cast<int>((std::sqrt(8.0 * m + 1.0) - 1.0) / 2.0 + 0.5);
  if (d < 1 || d * (d + 1) / 2 != m)
    throw std::invalid_argument("vech_dim_from_size: length is not d(d+1)/2");
  return d;
}

int vech_index(int r, int c, int d) {
  if (c < 0 || r < c || r >= d)
    throw std::invalid_argument("vech_index: need 0 <= c <= r < d");
  return c * d - c * (c - 1) / 2 + (r - c);
}

std::vector<std::pair<int, int>> vech_pairs(int d) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(vech_size(d));
  for (int k = 1; k <= d; ++k)
    for (int l = k; l <= d; ++l) pairs.emplace_back(k, l);
  return pairs;
}

Vector vech(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("vech: matrix must be square");
  const int d = static_cast<int>(m.rows());
  Vector v(vech_size(d));
  int idx = 0;
  for (int c = 0; c < d; ++c)
    for (int r = c; r < d; ++r) v(idx++) = m(r, c);
  return v;
}

Matrix unvech(const Vector& v) {
  const int d = vech_dim_from_size(static_cast<int>(v.size()));
  Matrix m(d, d);
  int idx = 0;
  for (int c = 0; c < d; ++c) {
    for (int r = c; r < d; ++r) {
      m(r, c) = v(idx);
      m(c, r) = v(idx);
      ++idx;
    }
  }
  return m;
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix basis_S(int k, int l, int d) {
  if (k < 1 || l < k || l > d)
    throw std::invalid_argument("basis_S: need 1 <= k <= l <= d");
  Matrix s = Matrix::Zero(d, d);
  if (k == l) {
    s(k - 1, k - 1) = 1.0;
  } else {
    s(k - 1, l - 1) = 1.0;
    s(l - 1, k - 1) = 1.0;
  }
  return s;
}

double trace_product(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument("trace_product: conformable square matrices required");
  return a.cwiseProduct(b.transpose()).sum();
}

namespace {

// Cholesky with the scale-invariant acceptance rule; returns false if the
// matrix fails the PD check. `l` receives the lower factor on success.
bool try_cholesky(const Matrix& m, Matrix& l) {
  if (m.rows() != m.cols()) return false;
  if (!m.allFinite()) return false;
  const int d = static_cast<int>(m.rows());
  const double max_diag = m.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) return false;
  Eigen::LLT<Matrix> llt(symmetrize(m));
  if (llt.info() != Eigen::Success) return false;
  l = llt.matrixL();
  const double min_pivot = l.diagonal().minCoeff();
  return min_pivot * min_pivot > 1e-12 * max_diag;
}

}  // namespace

SpdMatrix::SpdMatrix(Matrix m) : m_(std::move(m)) {
  if (!try_cholesky(m_, chol_))
    throw std::domain_error("SpdMatrix: matrix is not symmetric positive definite");
  m_ = symmetrize(m_);
}

SpdMatrix SpdMatrix::identity(int d) { return SpdMatrix(Matrix::Identity(d, d)); }

double SpdMatrix::log_det() const { return 2.0 * chol_.diagonal().array().log().sum(); }

Matrix SpdMatrix::inverse() const {
  const Matrix id = Matrix::Identity(dim(), dim());
  return solve(id);
}

Vector SpdMatrix::solve(const Vector& rhs) const {
  Vector y = chol_.triangularView<Eigen::Lower>().solve(rhs);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix SpdMatrix::solve(const Matrix& rhs) const {
  Matrix y = chol_.triangularView<Eigen::Lower>().solve(rhs);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
}

bool is_spd(const Matrix& m) {
  Matrix l;
  return try_cholesky(m, l);
}

Matrix sym_sqrt(const SpdMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.matrix());
  if (es.info() != Eigen::Success)
    throw std::domain_error("sym_sqrt: eigendecomposition failed");
  Matrix root = es.eigenvectors() *
                es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                es.eigenvectors().transpose();
  return symmetrize(root);
}

SpdMatrix spd_from_log_chol(const Vector& params) {
  if (!params.allFinite())
    throw std::invalid_argument("spd_from_log_chol: non-finite parameters");
  const int d = vech_dim_from_size(static_cast<int>(params.size()));
  Matrix l = Matrix::Zero(d, d);
  int idx = 0;
  for (int c = 0; c < d; ++c) {
    for (int r = c; r < d; ++r) {
      l(r, c) = (r == c) ? std::exp(params(idx)) : params(idx);
      ++idx;
    }
  }
  return SpdMatrix(l * l.transpose());
}

Vector spd_to_log_chol(const SpdMatrix& m) {
  const Matrix& l = m.chol_lower();
  const int d = m.dim();
  Vector params(vech_size(d));
  int idx = 0;
  for (int c = 0; c < d; ++c) {
    for (int r = c; r < d; ++r) {
      params(idx) = (r == c) ? std::log(l(r, c)) : l(r, c);
      ++idx;
    }
  }
  return params;
}

}  // namespace mdpde
