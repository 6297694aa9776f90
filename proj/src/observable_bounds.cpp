#include "mdiqkd/observable_bounds.hpp"

#include "mdiqkd/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdiqkd {

namespace {

template <class Fn>
void for_each_cell(Fn&& fn) {
  for (Basis b : {Basis::Z, Basis::X}) {
    for (int ia = 0; ia < kIntensityCount; ++ia) {
      for (int ib = 0; ib < kIntensityCount; ++ib) fn(b, ia, ib);
    }
  }
}

BoundedObservable standard_error_interval(double value, double n_sigma, double count) {
  if (value <= 0.0) return {0.0, n_sigma * n_sigma / count};
  const double half = n_sigma * std::sqrt(value / count);
  return {std::max(0.0, value - half), std::min(1.0, value + half)};
}

}  // namespace

IntervalSet IntervalSet::point(const ObservableSet& obs) {
  IntervalSet out;
  for_each_cell([&](Basis b, int ia, int ib) {
    const auto& o = obs.at(b, ia, ib);
    out.at(b, ia, ib) = {{o.gain, o.gain}, {o.error_gain(), o.error_gain()}};
  });
  return out;
}

BoundedObservable untagged_bounds(const BoundedObservable& measured, double fa, double fb) {
  const double f = fa * fb;
  if (!(f > 0.0)) throw std::domain_error("no untagged pulses");
  BoundedObservable out;
  out.upper = std::min(1.0, measured.upper / f);
  // 1 - fa fb without cancellation; the naive (Q - 1 + f) loses all digits of
  // gains near 1e-11.
  const double tagged = (1.0 - fa) + fa * (1.0 - fb);
  out.lower = std::max(0.0, (measured.lower - tagged) / f);
  return out;
}

BoundedObservable untagged_gain_bounds(double q_e, double fa, double fb) {
  return untagged_bounds({q_e, q_e}, fa, fb);
}

BoundedObservable untagged_error_gain_bounds(double q_e, double e_e, double fa, double fb) {
  const double eq = q_e * e_e;
  return untagged_bounds({eq, eq}, fa, fb);
}

IntervalSet untagged_intervals(const IntervalSet& measured, double fa, double fb) {
  IntervalSet out;
  for_each_cell([&](Basis b, int ia, int ib) {
    const auto& m = measured.at(b, ia, ib);
    out.at(b, ia, ib) = {untagged_bounds(m.gain, fa, fb), untagged_bounds(m.error_gain, fa, fb)};
  });
  return out;
}

double deviation_multiplier(double epsilon_sec, int constraints) {
  if (constraints < 1) throw std::domain_error("deviation_multiplier: need >= 1 constraint");
  return gaussian_two_sided_quantile(epsilon_sec / constraints);
}

IntervalSet finite_key_deviation(const ObservableSet& obs, double epsilon_sec, int constraints) {
  const double n_sigma = deviation_multiplier(epsilon_sec, constraints);
  IntervalSet out;
  for_each_cell([&](Basis b, int ia, int ib) {
    const auto& o = obs.at(b, ia, ib);
    if (!o.pair_count || !(*o.pair_count > 0.0)) throw std::domain_error("no statistics");
    const double n = *o.pair_count;
    out.at(b, ia, ib) = {standard_error_interval(o.gain, n_sigma, n),
                         standard_error_interval(o.error_gain(), n_sigma, n)};
  });
  return out;
}

}  // namespace mdiqkd
