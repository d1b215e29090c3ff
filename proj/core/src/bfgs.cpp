#include "mdpde/bfgs.hpp"

#include <cmath>
#include <limits>

namespace mdpde {

BfgsResult minimize_bfgs(const ObjectiveFn& fg, const Vector& x0,
                         const BfgsOptions& opts) {
  const int n = static_cast<int>(x0.size());
  constexpr double kArmijoC1 = 1e-4;

  BfgsResult res;
  res.x = x0;
  res.grad.resize(n);
  res.value = fg(res.x, res.grad);
  if (!std::isfinite(res.value) || !res.grad.allFinite()) {
    res.status = BfgsStatus::non_finite_start;
    res.grad_norm = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  res.grad_norm = res.grad.cwiseAbs().maxCoeff();

  Matrix h_inv = Matrix::Identity(n, n);
  Vector x_new(n), g_new(n);

  for (int it = 0; it < opts.max_iters; ++it) {
    if (res.grad_norm <= opts.grad_tol) {
      res.status = BfgsStatus::converged;
      res.converged = true;
      return res;
    }

    Vector dir = -(h_inv * res.grad);
    double slope = res.grad.dot(dir);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      dir = -res.grad;
      slope = res.grad.dot(dir);
    }

    const double dir_norm = dir.cwiseAbs().maxCoeff();
    double t = 1.0;
    bool accepted = false;
    double f_new = res.value;
    while (t * dir_norm >= opts.step_tol) {
      x_new = res.x + t * dir;
      f_new = fg(x_new, g_new);
      if (std::isfinite(f_new) && g_new.allFinite() &&
          f_new <= res.value + kArmijoC1 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.status = BfgsStatus::line_search_stalled;
      res.converged = res.grad_norm <= opts.grad_tol;
      return res;
    }

    const Vector s = x_new - res.x;
    const Vector y = g_new - res.grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Vector hy = h_inv * y;
      // H <- (I - rho s y') H (I - rho y s') + rho s s'
      h_inv += rho * ((1.0 + rho * y.dot(hy)) * (s * s.transpose())) -
               rho * (hy * s.transpose() + s * hy.transpose());
    }

    res.x = x_new;
    res.value = f_new;
    res.grad = g_new;
    res.grad_norm = res.grad.cwiseAbs().maxCoeff();
    res.iterations = it + 1;
  }

  res.status = BfgsStatus::max_iters;
  res.converged = res.grad_norm <= opts.grad_tol;
  return res;
}

}  // namespace mdpde
