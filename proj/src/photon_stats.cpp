#include "mdiqkd/photon_stats.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mdiqkd {

double Pmf::total() const {
  // Neumaier summation; the masses span many decades.
  double sum = 0.0;
  double comp = 0.0;
  for (double m : mass) {
    const double t = sum + m;
    comp += std::abs(sum) >= std::abs(m) ? (sum - t) + m : (m - t) + sum;
    sum = t;
  }
  return sum + comp;
}

namespace stats {

namespace {

constexpr double kSeriesLimit = 2.5;
constexpr int kFractionDepth = 160;

// exp(x^2) * erf(x) * sqrt(pi) / 2 = sum_k x (2x^2)^k / (2k+1)!!
double erf_series(double x) {
  const double x2 = 2.0 * x * x;
  double term = x;
  double sum = x;
  for (int k = 1; k < 400; ++k) {
    term *= x2 / (2.0 * k + 1.0);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum * std::exp(-x * x) * 2.0 / std::sqrt(std::numbers::pi);
}

// erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
double erfc_fraction(double x) {
  double f = x;
  for (int k = kFractionDepth; k >= 1; --k) {
    f = x + (0.5 * k) / f;
  }
  return std::exp(-x * x) / (std::sqrt(std::numbers::pi) * f);
}

}  // namespace

double erf(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) return -erf(-x);
  if (x < kSeriesLimit) return erf_series(x);
  return 1.0 - erfc_fraction(x);
}

double erfc(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) return 2.0 - erfc(-x);
  if (x < kSeriesLimit) return 1.0 - erf_series(x);
  if (x > 27.3) return 0.0;
  return erfc_fraction(x);
}

}  // namespace stats

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// log(n!) - [(n + 1/2) log n - n + log(sqrt(2 pi))]
double stirling_error(double n) {
  if (n <= 15.0) {
    return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - 0.5 * kLog2Pi;
  }
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  const double nn = n * n;
  if (n > 500.0) return (s0 - s1 / nn) / n;
  if (n > 80.0) return (s0 - (s1 - s2 / nn) / nn) / n;
  if (n > 35.0) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

// Deviance term x log(x / np) + np - x, with diff = x - np supplied exactly.
double deviance(double x, double np, double diff) {
  if (std::abs(diff) < 0.1 * (x + np)) {
    double v = diff / (x + np);
    double s = diff * v;
    double ej = 2.0 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double next = s + ej / (2.0 * j + 1.0);
      if (next == s) return next;
      s = next;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error(std::string(what) + ": probability out of [0,1]");
  }
}

}  // namespace

double binomial_pmf(std::int64_t n, std::int64_t m, double p) {
  if (n < 0 || m < 0 || n > m) {
    throw std::domain_error("binomial_pmf: need 0 <= n <= m");
  }
  check_probability(p, "binomial_pmf");
  if (p == 0.0) return n == 0 ? 1.0 : 0.0;
  if (p == 1.0) return n == m ? 1.0 : 0.0;
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  if (n == 0) return std::exp(md * std::log1p(-p));
  if (n == m) return std::exp(md * std::log(p));
  const double mp = md * p;
  const double mq = md - mp;
  const double rest = md - nd;
  const double lc = stirling_error(md) - stirling_error(nd) - stirling_error(rest) -
                    deviance(nd, mp, nd - mp) - deviance(rest, mq, mp - nd);
  const double lf = kLog2Pi + std::log(nd) + std::log1p(-nd / md);
  return std::exp(lc - 0.5 * lf);
}

double poisson_pmf(std::int64_t n, double mu) {
  if (n < 0 || !(mu >= 0.0)) {
    throw std::domain_error("poisson_pmf: need n >= 0 and mu >= 0");
  }
  if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
  if (n == 0) return std::exp(-mu);
  const double nd = static_cast<double>(n);
  return std::exp(-stirling_error(nd) - deviance(nd, mu, nd - mu)) /
         std::sqrt(2.0 * std::numbers::pi * nd);
}

namespace {

template <class Mass>
double upper_tail(std::int64_t cut, double mean, std::int64_t last, Mass mass) {
  if (cut < 0) return 1.0;
  if (cut >= last) return 0.0;
  if (static_cast<double>(cut) >= mean) {
    double sum = 0.0;
    for (std::int64_t n = cut + 1; n <= last; ++n) {
      const double t = mass(n);
      sum += t;
      if (t <= sum * 1e-18 || t == 0.0) break;
    }
    return sum;
  }
  double below = 0.0;
  for (std::int64_t n = 0; n <= cut; ++n) below += mass(n);
  return std::max(0.0, 1.0 - below);
}

}  // namespace

double binomial_upper_tail(std::int64_t cut, std::int64_t m, double p) {
  return upper_tail(cut, static_cast<double>(m) * p, m,
                    [&](std::int64_t n) { return binomial_pmf(n, m, p); });
}

double poisson_upper_tail(std::int64_t cut, double mu) {
  return upper_tail(cut, mu, INT64_MAX, [&](std::int64_t n) { return poisson_pmf(n, mu); });
}

Pmf binomial_distribution(std::int64_t m, double p, int support_max) {
  Pmf pmf;
  pmf.mass.resize(static_cast<std::size_t>(support_max) + 1, 0.0);
  for (int n = 0; n <= support_max && n <= m; ++n) pmf.mass[n] = binomial_pmf(n, m, p);
  return pmf;
}

Pmf poisson_distribution(double mu, int support_max) {
  Pmf pmf;
  pmf.mass.resize(static_cast<std::size_t>(support_max) + 1, 0.0);
  for (int n = 0; n <= support_max; ++n) pmf.mass[n] = poisson_pmf(n, mu);
  return pmf;
}

double binary_entropy(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double gaussian_cdf(double x, double mean, double variance) {
  if (!(variance > 0.0)) throw std::domain_error("gaussian_cdf: variance must be positive");
  const double z = (x - mean) / std::sqrt(2.0 * variance);
  // 0.5 erfc(-z) keeps relative precision in the lower tail.
  return 0.5 * stats::erfc(-z);
}

double gaussian_two_sided_quantile(double two_sided_tail) {
  if (!(two_sided_tail > 0.0 && two_sided_tail <= 1.0)) {
    throw std::domain_error("gaussian_two_sided_quantile: tail must be in (0,1]");
  }
  const double target = std::log(two_sided_tail);
  double lo = 0.0;
  double hi = 38.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double tail = stats::erfc(mid / std::numbers::sqrt2);
    if (tail > 0.0 && std::log(tail) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double poisson_limit_distance(std::int64_t m, double p) {
  check_probability(p, "poisson_limit_distance");
  const double lambda = static_cast<double>(m) * p;
  const auto last =
      static_cast<std::int64_t>(std::ceil(lambda + 40.0 * std::sqrt(lambda) + 60.0));
  double sum = 0.0;
  for (std::int64_t n = 0; n <= last; ++n) {
    const double b = n <= m ? binomial_pmf(n, m, p) : 0.0;
    sum += std::abs(b - poisson_pmf(n, lambda));
  }
  return 0.5 * sum;
}

}  // namespace mdiqkd
