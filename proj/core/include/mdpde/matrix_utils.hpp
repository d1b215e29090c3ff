#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace mdpde {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Number of distinct entries of a symmetric d x d matrix, d* = d(d+1)/2.
int vech_size(int d);

/// Recovers d from a vech length m = d(d+1)/2. Throws std::invalid_argument
/// if m is not of that form.
int vech_dim_from_size(int m);

/// Flat vech position of lower-triangle entry (r, c), 0-based, r >= c.
/// Ordering is column-major over the lower triangle:
/// (0,0), (1,0), ..., (d-1,0), (1,1), (2,1), ..., (d-1,d-1).
int vech_index(int r, int c, int d);

/// The (k, l) pairs (1-based, k <= l) indexing vech components in order.
/// Pair j corresponds to the matrix entry sigma_{l k} = sigma_{k l}.
std::vector<std::pair<int, int>> vech_pairs(int d);

/// Stacks the lower triangle of a square matrix column-wise.
Vector vech(const Matrix& m);

/// Inverse of vech: rebuilds the full symmetric matrix.
Matrix unvech(const Vector& v);

bool is_symmetric(const Matrix& m, double tol = 0.0);
Matrix symmetrize(const Matrix& m);

/// Symmetric basis matrix S_{kl} (1-based, k <= l): E_{kk} when k == l,
/// E_{kl} + E_{lk} otherwise.
Matrix basis_S(int k, int l, int d);

/// tr(a b) accumulated elementwise without forming the product.
double trace_product(const Matrix& a, const Matrix& b);

/// Symmetric positive definite matrix with a cached lower Cholesky factor.
/// Construction validates positive definiteness with a scale-invariant
/// pivot check (smallest squared pivot > 1e-12 * max diagonal entry).
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix m);
  static SpdMatrix identity(int d);

  const Matrix& matrix() const { return m_; }
  const Matrix& chol_lower() const { return chol_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  double log_det() const;
  Matrix inverse() const;
  Vector solve(const Vector& rhs) const;
  Matrix solve(const Matrix& rhs) const;

 private:
  Matrix m_;
  Matrix chol_;
};

/// Scale-invariant positive definiteness check (see SpdMatrix).
bool is_spd(const Matrix& m);

/// Unique symmetric positive definite square root, via eigendecomposition.
Matrix sym_sqrt(const SpdMatrix& m);

/// Log-Cholesky parameterization of the SPD cone. `params` holds the lower
/// triangle of L in vech order with log-transformed diagonal; returns L L^T.
SpdMatrix spd_from_log_chol(const Vector& params);
Vector spd_to_log_chol(const SpdMatrix& m);

}  // namespace mdpde
