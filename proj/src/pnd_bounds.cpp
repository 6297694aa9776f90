#include "mdiqkd/pnd_bounds.hpp"

#include "mdiqkd/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdiqkd {

double PndBounds::excess_mass(int cut) const {
  if (cut < 0) return 1.0;
  if (cut > n_max()) throw std::out_of_range("excess_mass: cut beyond tabulated range");
  double below = 0.0;
  for (int n = 0; n <= cut; ++n) below += lower[static_cast<std::size_t>(n)];
  return std::clamp(std::min(1.0 - below, upper_tail[static_cast<std::size_t>(cut)]), 0.0, 1.0);
}

PndBounds pnd_bounds(double M, double delta, double eff_p, int n_max) {
  if (n_max < 2) throw std::domain_error("pnd_bounds: n_max must be >= 2");
  if (!(M > 0.0) || !(delta >= 0.0 && delta < 1.0)) {
    throw std::domain_error("pnd_bounds: need M > 0 and 0 <= delta < 1");
  }
  if (!(eff_p >= 0.0 && eff_p <= 1.0)) throw std::domain_error("pnd_bounds: eff_p out of [0,1]");
  if (!((1.0 + delta) * M * eff_p < 1.0)) {
    throw std::domain_error("pnd_bounds: weak-output condition (1+delta) M lambda q < 1 violated");
  }
  PndBounds b;
  b.effective_p = eff_p;
  b.window_lo = static_cast<std::int64_t>(std::floor((1.0 - delta) * M));
  b.window_hi = static_cast<std::int64_t>(std::ceil((1.0 + delta) * M));
  b.upper.resize(static_cast<std::size_t>(n_max) + 1);
  b.lower.resize(static_cast<std::size_t>(n_max) + 1);
  // P(0|m) falls with m, P(n|m) for n >= 1 rises with m while m p < 1.
  b.upper[0] = binomial_pmf(0, b.window_lo, eff_p);
  b.lower[0] = binomial_pmf(0, b.window_hi, eff_p);
  for (int n = 1; n <= n_max; ++n) {
    b.upper[static_cast<std::size_t>(n)] = n <= b.window_hi ? binomial_pmf(n, b.window_hi, eff_p) : 0.0;
    b.lower[static_cast<std::size_t>(n)] = n <= b.window_lo ? binomial_pmf(n, b.window_lo, eff_p) : 0.0;
  }
  b.upper_tail.resize(static_cast<std::size_t>(n_max) + 1);
  for (int c = 0; c <= n_max; ++c) {
    b.upper_tail[static_cast<std::size_t>(c)] = binomial_upper_tail(c, b.window_hi, eff_p);
  }
  return b;
}

PndBounds poisson_pnd(double mean, int n_max) {
  if (n_max < 2) throw std::domain_error("poisson_pnd: n_max must be >= 2");
  PndBounds b;
  b.effective_p = 0.0;
  b.upper.resize(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) b.upper[static_cast<std::size_t>(n)] = poisson_pmf(n, mean);
  b.lower = b.upper;
  b.upper_tail.resize(static_cast<std::size_t>(n_max) + 1);
  for (int c = 0; c <= n_max; ++c) b.upper_tail[static_cast<std::size_t>(c)] = poisson_upper_tail(c, mean);
  return b;
}

}  // namespace mdiqkd
