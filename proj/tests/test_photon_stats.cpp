#include "mdiqkd/photon_stats.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

using namespace mdiqkd;

namespace {

// Log-domain references built from lgamma, independent of the saddle-point code.
long double log_binomial(long double n, long double m, long double p) {
  return std::lgamma(m + 1) - std::lgamma(n + 1) - std::lgamma(m - n + 1) + n * std::log(p) +
         (m - n) * std::log1p(-p);
}

long double log_poisson(long double n, long double mu) {
  return -mu + n * std::log(mu) - std::lgamma(n + 1);
}

double tv_reference(std::int64_t m, double p) {
  long double sum = 0.0L;
  const std::int64_t top = std::min<std::int64_t>(m, 200);
  for (std::int64_t n = 0; n <= top; ++n) {
    sum += std::fabs(std::exp(log_binomial(n, m, p)) - std::exp(log_poisson(n, m * p)));
  }
  // Poisson mass the binomial cannot reach.
  long double below = 0.0L;
  for (std::int64_t n = 0; n <= top; ++n) below += std::exp(log_poisson(n, m * p));
  sum += 1.0L - below;
  return static_cast<double>(sum / 2);
}

}  // namespace

TEST_SUITE("photon_stats") {

TEST_CASE("binomial pmf") {
  CHECK(binomial_pmf(0, 2, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(binomial_pmf(0, 0, 0.3) == 1.0);
  CHECK_THROWS_AS(binomial_pmf(3, 2, 0.5), std::domain_error);

  const double ref = static_cast<double>(std::exp(log_binomial(1, 1e6, 1e-7)));
  CHECK(binomial_pmf(1, 1000000, 1e-7) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(binomial_pmf(1, 1000000, 1e-7) == doctest::Approx(0.0904837).epsilon(1e-6));

  // Operating regime of the monitor: m ~ 1e9, p ~ 1e-10. The long-double
  // lgamma reference cancels terms near 2e10, which leaves it good to a few
  // parts in 1e9 and no better.
  for (int n = 0; n <= 8; ++n) {
    const double r = static_cast<double>(std::exp(log_binomial(n, 1e9, 3e-10)));
    CHECK(binomial_pmf(n, 1000000000, 3e-10) == doctest::Approx(r).epsilon(1e-8));
  }
}

TEST_CASE("binomial pmf sums to one") {
  for (double p : {0.01, 0.3, 0.9}) {
    double s = 0.0;
    for (int n = 0; n <= 40; ++n) s += binomial_pmf(n, 40, p);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("poisson pmf") {
  CHECK(poisson_pmf(0, 0.0) == 1.0);
  CHECK(poisson_pmf(3, 0.0) == 0.0);
  CHECK(poisson_pmf(1, 0.1) == doctest::Approx(0.1 * std::exp(-0.1)).epsilon(1e-14));
  CHECK(poisson_pmf(2, 0.5) == doctest::Approx(0.125 * std::exp(-0.5)).epsilon(1e-14));
  CHECK(poisson_pmf(2, 0.5) == doctest::Approx(0.075816).epsilon(1e-5));
  for (int n = 0; n < 30; n += 3) {
    CHECK(poisson_pmf(n, 7.5) == doctest::Approx(static_cast<double>(std::exp(log_poisson(n, 7.5)))).epsilon(1e-12));
  }
}

TEST_CASE("upper tails complement the head") {
  double head = 0.0;
  for (int n = 0; n <= 7; ++n) head += poisson_pmf(n, 0.5);
  CHECK(poisson_upper_tail(7, 0.5) == doctest::Approx(1.0 - head).epsilon(1e-6));
  CHECK(poisson_upper_tail(7, 0.5) > 0.0);
  double bhead = 0.0;
  for (int n = 0; n <= 3; ++n) bhead += binomial_pmf(n, 50, 0.1);
  CHECK(binomial_upper_tail(3, 50, 0.1) == doctest::Approx(1.0 - bhead).epsilon(1e-12));
}

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  const long double x = 0.11L;
  const double ref = static_cast<double>(-(x * std::log2(x)) - (1 - x) * std::log2(1 - x));
  CHECK(binary_entropy(0.11) == doctest::Approx(ref).epsilon(1e-14));
  CHECK(binary_entropy(0.11) == doctest::Approx(0.49992).epsilon(1e-5));
  CHECK(binary_entropy(0.3) == doctest::Approx(binary_entropy(0.7)).epsilon(1e-15));
}

TEST_CASE("erf pair matches libm") {
  for (double x = -6.0; x <= 6.0; x += 0.0625) {
    CHECK(stats::erf(x) == doctest::Approx(std::erf(x)).epsilon(1e-15).scale(1.0));
  }
  for (double x = 2.5; x <= 26.0; x += 0.5) {
    CHECK(stats::erfc(x) == doctest::Approx(std::erfc(x)).epsilon(1e-13));
  }
}

TEST_CASE("gaussian cdf") {
  CHECK(gaussian_cdf(3.0, 3.0, 4.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gaussian_cdf(3.0 + 2.0, 3.0, 4.0) == doctest::Approx(0.841344746068543).epsilon(1e-12));
  CHECK(gaussian_cdf(std::numeric_limits<double>::infinity(), 0.0, 1.0) == 1.0);
  CHECK(gaussian_cdf(-std::numeric_limits<double>::infinity(), 0.0, 1.0) == 0.0);
}

TEST_CASE("two-sided quantile inverts the tail") {
  for (double t : {1e-2, 1e-5, 5.5e-12}) {
    const double z = gaussian_two_sided_quantile(t);
    CHECK(std::erfc(z / std::sqrt(2.0)) == doctest::Approx(t).epsilon(1e-8));
  }
}

TEST_CASE("poisson limit distance") {
  CHECK(poisson_limit_distance(1, 0.0) == 0.0);
  CHECK(poisson_limit_distance(1000000, 1e-7) < 1e-6);
  CHECK(poisson_limit_distance(10, 0.5) > 0.01);
  CHECK(poisson_limit_distance(10, 0.5) == doctest::Approx(tv_reference(10, 0.5)).epsilon(1e-9));
  CHECK(poisson_limit_distance(1000000, 1e-7) == doctest::Approx(tv_reference(1000000, 1e-7)).epsilon(1e-4));
}

TEST_CASE("distribution tables") {
  const Pmf b = binomial_distribution(20, 0.2, 25);
  CHECK(b.support_max() == 25);
  CHECK(b[21] == 0.0);
  CHECK(b[-1] == 0.0);
  CHECK(b.total() == doctest::Approx(1.0).epsilon(1e-13));
  const Pmf pz = poisson_distribution(0.5, 30);
  CHECK(pz.total() == doctest::Approx(1.0).epsilon(1e-13));
}

}  // TEST_SUITE
