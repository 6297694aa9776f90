#pragma once

#include <cstdint>
#include <vector>

namespace mdiqkd {

/// Envelopes of P(n|m) for inputs m in the untagged window, n = 0..n_max.
struct PndBounds {
  std::vector<double> upper;
  std::vector<double> lower;
  std::int64_t window_lo = 0;  ///< floor((1-delta) M)
  std::int64_t window_hi = 0;  ///< ceil((1+delta) M)
  double effective_p = 0.0;    ///< lambda q

  int n_max() const { return static_cast<int>(upper.size()) - 1; }

  /// Upper bound on the output mass above `cut` for any input in the window:
  /// min(1 - sum_{n<=cut} lower(n), sum_{n>cut} upper(n)).
  double excess_mass(int cut) const;

  // sum_{n>c} upper(n) for c = 0..n_max, computed to convergence.
  std::vector<double> upper_tail;
};

/// Binomial window envelopes. Requires (1+delta) M eff_p < 1 and n_max >= 2;
/// throws std::domain_error naming the condition otherwise.
PndBounds pnd_bounds(double M, double delta, double eff_p, int n_max);

/// Degenerate envelope of an exact Poisson source (trusted-source baseline).
PndBounds poisson_pnd(double mean, int n_max);

}  // namespace mdiqkd
