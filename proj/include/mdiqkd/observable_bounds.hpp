#pragma once

#include <array>
#include <optional>

namespace mdiqkd {

enum class Basis { Z = 0, X = 1 };

/// Intensity index: 0 = signal mu, 1 = decoy nu, 2 = vacuum omega.
inline constexpr int kIntensityCount = 3;

struct Observable {
  double gain = 0.0;
  double qber = 0.0;
  std::optional<double> pair_count;

  double error_gain() const { return gain * qber; }
};

/// Gains and QBERs per (intensity_a, intensity_b, basis).
struct ObservableSet {
  std::array<std::array<std::array<Observable, kIntensityCount>, kIntensityCount>, 2> cells{};

  Observable& at(Basis b, int ia, int ib) {
    return cells[static_cast<std::size_t>(b)][static_cast<std::size_t>(ia)]
                [static_cast<std::size_t>(ib)];
  }
  const Observable& at(Basis b, int ia, int ib) const {
    return cells[static_cast<std::size_t>(b)][static_cast<std::size_t>(ia)]
                [static_cast<std::size_t>(ib)];
  }
};

struct BoundedObservable {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
};

struct ObservableInterval {
  BoundedObservable gain;
  BoundedObservable error_gain;
};

/// Interval-valued counterpart of ObservableSet.
struct IntervalSet {
  std::array<std::array<std::array<ObservableInterval, kIntensityCount>, kIntensityCount>, 2>
      cells{};

  ObservableInterval& at(Basis b, int ia, int ib) {
    return cells[static_cast<std::size_t>(b)][static_cast<std::size_t>(ia)]
                [static_cast<std::size_t>(ib)];
  }
  const ObservableInterval& at(Basis b, int ia, int ib) const {
    return cells[static_cast<std::size_t>(b)][static_cast<std::size_t>(ia)]
                [static_cast<std::size_t>(ib)];
  }

  /// Zero-width intervals at the measured values (infinite-key limit).
  static IntervalSet point(const ObservableSet& obs);
};

/// Bounds on the gain of pulse pairs where both inputs were untagged, from the
/// overall gain q_e and the untagged fractions fa, fb. Throws when fa*fb == 0.
BoundedObservable untagged_gain_bounds(double q_e, double fa, double fb);

/// Same algebra applied to the overall error gain q_e * e_e.
BoundedObservable untagged_error_gain_bounds(double q_e, double e_e, double fa, double fb);

/// Interval version: the outer envelope over a measured interval.
BoundedObservable untagged_bounds(const BoundedObservable& measured, double fa, double fb);

/// Applies untagged_bounds to every gain and error gain of the set.
IntervalSet untagged_intervals(const IntervalSet& measured, double fa, double fb);

/// n_sigma for a total failure budget split evenly over `constraints`
/// two-sided Gaussian deviations.
double deviation_multiplier(double epsilon_sec, int constraints);

/// Standard-error intervals value +- n_sigma sqrt(value / N) on every gain and
/// error gain, N being the cell's pair_count. A zero value maps to
/// [0, n_sigma^2 / N]. Throws when a pair count is missing or zero.
IntervalSet finite_key_deviation(const ObservableSet& obs, double epsilon_sec, int constraints);

}  // namespace mdiqkd
