#pragma once

#include <cstdint>
#include <vector>

namespace mdiqkd {

/// Probability mass function on the integers 0..support_max().
struct Pmf {
  std::vector<double> mass;

  int support_max() const { return static_cast<int>(mass.size()) - 1; }
  double total() const;
  double operator[](int n) const { return n < 0 || n > support_max() ? 0.0 : mass[n]; }
};

namespace stats {

// Error function pair evaluated without the platform libm so that results do
// not depend on the C library. For 0 <= x < 2.5 a positive-term Taylor series
// of exp(x^2) erf(x) is summed (no cancellation); for x >= 2.5 erfc uses a
// fixed-depth backward evaluation of its Laplace continued fraction. Absolute
// error is below 1e-15 for erf and relative error below 1e-13 for erfc in the
// tail (checked against std::erf/std::erfc in the tests).
double erf(double x);
double erfc(double x);

}  // namespace stats

/// C(m, n) p^n (1-p)^(m-n), evaluated with Loader's saddle-point expansion so
/// that m ~ 1e9 with p ~ 1e-10 keeps full relative precision.
double binomial_pmf(std::int64_t n, std::int64_t m, double p);

/// exp(-mu) mu^n / n!, same saddle-point treatment as binomial_pmf.
double poisson_pmf(std::int64_t n, double mu);

/// Sum of binomial_pmf(n, m, p) over n > cut.
double binomial_upper_tail(std::int64_t cut, std::int64_t m, double p);
double poisson_upper_tail(std::int64_t cut, double mu);

Pmf binomial_distribution(std::int64_t m, double p, int support_max);
Pmf poisson_distribution(double mu, int support_max);

/// -x log2 x - (1-x) log2 (1-x), zero at both endpoints.
double binary_entropy(double x);

double gaussian_cdf(double x, double mean, double variance);

/// z such that P(|N(0,1)| > z) == two_sided_tail.
double gaussian_two_sided_quantile(double two_sided_tail);

/// Total variation distance between Binomial(m, p) and Poisson(m p).
double poisson_limit_distance(std::int64_t m, double p);

}  // namespace mdiqkd
