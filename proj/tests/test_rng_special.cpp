#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "mdpde/rng.hpp"
#include "mdpde/special_functions.hpp"

using namespace mdpde;

TEST_CASE("inverse normal CDF against reference quantiles") {
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  CHECK(inverse_normal_cdf(0.025) ==
        doctest::Approx(-1.9599639845400545).epsilon(1e-14));
  CHECK(inverse_normal_cdf(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(inverse_normal_cdf(0.3) ==
        doctest::Approx(-0.5244005127080409).epsilon(1e-14));
  CHECK(inverse_normal_cdf(1e-10) ==
        doctest::Approx(-6.361340902404056).epsilon(1e-12));
  CHECK(inverse_normal_cdf(0.999999) ==
        doctest::Approx(4.753424308817087).epsilon(1e-12));
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), std::invalid_argument);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), std::invalid_argument);
}

TEST_CASE("inverse normal CDF is odd and monotone") {
  double prev = -1e9;
  for (double p = 0.01; p < 1.0; p += 0.01) {
    const double q = inverse_normal_cdf(p);
    CHECK(q > prev);
    prev = q;
    CHECK(q == doctest::Approx(-inverse_normal_cdf(1.0 - p)).epsilon(1e-12));
  }
}

TEST_CASE("rng streams are deterministic and seed-sensitive") {
  Rng a(123), b(123), c(124);
  bool all_equal = true;
  bool any_equal_to_c = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    all_equal = all_equal && (va == b.next_u64());
    any_equal_to_c = any_equal_to_c || (va == c.next_u64());
  }
  CHECK(all_equal);
  CHECK(!any_equal_to_c);
}

TEST_CASE("rng uniforms live in (0,1) and normals have sane moments") {
  Rng rng(7);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  bool in_range = true;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_uniform();
    in_range = in_range && u > 0.0 && u < 1.0;
    const double z = rng.next_normal();
    sum += z;
    sum_sq += z * z;
  }
  CHECK(in_range);
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::fabs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("next_below covers the range") {
  Rng rng(99);
  std::set<std::uint64_t> seen;
  bool in_range = true;
  for (int i = 0; i < 3000; ++i) {
    const auto v = rng.next_below(10);
    in_range = in_range && v < 10;
    seen.insert(v);
  }
  CHECK(in_range);
  CHECK(seen.size() == 10);
  CHECK_THROWS_AS(rng.next_below(0), std::invalid_argument);
}

TEST_CASE("regularized incomplete gamma against reference values") {
  struct Case {
    double a, x, p, q;
  };
  const Case cases[] = {
      {0.5, 0.25, 0.5204998778130466, 0.47950012218695337},
      {3.0, 2.5, 0.45618688411667035, 0.5438131158833297},
      {10.0, 10.0, 0.5420702855281478, 0.4579297144718523},
      {2.5, 30.0, 0.9999999999878454, 1.2154569777183007e-11},
      {1.0, 1.0, 0.6321205588285577, 0.36787944117144245},
  };
  for (const auto& c : cases) {
    CHECK(regularized_gamma_p(c.a, c.x) == doctest::Approx(c.p).epsilon(1e-12));
    CHECK(regularized_gamma_q(c.a, c.x) == doctest::Approx(c.q).epsilon(1e-10));
  }
  CHECK(regularized_gamma_p(2.0, 0.0) == 0.0);
  CHECK(regularized_gamma_q(2.0, 0.0) == 1.0);
  CHECK_THROWS_AS(regularized_gamma_p(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(regularized_gamma_q(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("chi-squared upper tail") {
  CHECK(chi_squared_upper_tail(3.841458820694124, 1) ==
        doctest::Approx(0.05).epsilon(1e-10));
  CHECK(chi_squared_upper_tail(3.841459, 1) ==
        doctest::Approx(0.04999999465319563).epsilon(1e-10));
  CHECK(chi_squared_upper_tail(12.591587243743977, 6) ==
        doctest::Approx(0.05).epsilon(1e-10));
  CHECK(chi_squared_upper_tail(5.0, 3) ==
        doctest::Approx(0.1717971442967335).epsilon(1e-10));
  CHECK(chi_squared_upper_tail(0.5, 2) ==
        doctest::Approx(0.7788007830714049).epsilon(1e-10));
  CHECK(chi_squared_upper_tail(150.0, 10) ==
        doctest::Approx(3.727485055062505e-27).epsilon(1e-9));
  CHECK(chi_squared_upper_tail(0.0, 4) == 1.0);
  CHECK_THROWS_AS(chi_squared_upper_tail(1.0, 0), std::invalid_argument);
}
