#pragma once

#include <functional>

#include "mdpde/matrix_utils.hpp"

namespace mdpde {

struct BfgsOptions {
  int max_iters = 500;
  double grad_tol = 1e-8;   // on the max-abs gradient component
  double step_tol = 1e-10;  // line search stops once steps shrink below this
};

enum class BfgsStatus {
  converged,
  max_iters,
  line_search_stalled,
  non_finite_start,
};

struct BfgsResult {
  Vector x;
  double value = 0.0;
  Vector grad;
  double grad_norm = 0.0;
  int iterations = 0;
  BfgsStatus status = BfgsStatus::max_iters;
  bool converged = false;
};

/// Evaluates f(x) and writes the gradient; may return NaN/inf for points the
/// line search should reject.
using ObjectiveFn = std::function<double(const Vector&, Vector&)>;

/// Dense BFGS with backtracking Armijo line search. Deterministic: identical
/// inputs give bit-identical iterates.
BfgsResult minimize_bfgs(const ObjectiveFn& fg, const Vector& x0,
                         const BfgsOptions& opts = {});

}  // namespace mdpde
