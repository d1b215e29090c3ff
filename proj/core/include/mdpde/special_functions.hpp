#pragma once

namespace mdpde {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
/// Series expansion for x < a + 1, Lentz continued fraction otherwise.
double regularized_gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// Upper tail of the chi-squared distribution with df degrees of freedom,
/// i.e. P(X > x) = Q(df/2, x/2).
double chi_squared_upper_tail(double x, int df);

}  // namespace mdpde
