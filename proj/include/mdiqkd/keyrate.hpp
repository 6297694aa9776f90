#pragma once

#include "mdiqkd/decoy_estimator.hpp"
#include "mdiqkd/params.hpp"
#include "mdiqkd/source_monitor.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mdiqkd {

enum class Mode { asymptotic, finite };

Mode parse_mode(const std::string& s);
const char* to_string(Mode m);

struct KeyRatePoint {
  double distance_km = 0.0;
  double mu_opt = 0.0;
  double rate_untrusted = 0.0;
  double rate_trusted = std::numeric_limits<double>::quiet_NaN();
  double mu_opt_trusted = std::numeric_limits<double>::quiet_NaN();
  double q11_lower = 0.0;
  double e11_upper = 0.0;
  double delta_frac = 0.0;
  double epsilon_sample = 0.0;
  double raw_rate = 0.0;  ///< value before the floor at zero
};

struct RateOptions {
  Mode mode = Mode::asymptotic;
  DecoyMethod estimator = DecoyMethod::lp;
  bool trusted = false;  ///< exact Poisson source, no tagging
};

/// Everything the pipeline produced for one (distance, mu).
struct RateEvaluation {
  double mu = 0.0;
  double rate = 0.0;
  double raw_rate = 0.0;
  bool admissible = true;  ///< false when mu violates a source condition
  std::string note;
  UntaggedStats stats;
  DecoyBounds bounds;
  double q_sig = 0.0;
  double e_sig = 0.0;
};

/// max(0, fa fb q11 (1 - H2(e11)) - q_sig f_e H2(e_sig)); the privacy term
/// is 0 once e11 reaches 1/2.
double key_rate(double fa, double fb, double q11_lower, double e11_upper, double q_sig, double e_sig,
                double f_e);
double key_rate_raw(double fa, double fb, double q11_lower, double e11_upper, double q_sig, double e_sig,
                    double f_e);

/// Decoy inputs for the configured intensities at one distance.
DecoyProblem build_decoy_problem(const ExperimentParams& p, double distance_km, const RateOptions& opt,
                                 UntaggedStats* stats_out = nullptr);

/// Full pipeline at p.intensities.mu.
RateEvaluation evaluate_rate(const ExperimentParams& p, double distance_km, const RateOptions& opt);

/// 0.05, 0.10, ..., 0.95.
std::vector<double> default_mu_grid();

/// Best mu over the grid (ties toward the smaller mu). With `refine` the
/// coarse argmax is revisited at a five times finer step.
KeyRatePoint optimize_mu(const ExperimentParams& p, double distance_km, const std::vector<double>& grid,
                         const RateOptions& opt, bool refine = true);

/// Optimised rate of conventional decoy MDI with a trusted Poisson source.
double trusted_baseline(const ExperimentParams& p, double distance_km, Mode mode = Mode::asymptotic);

struct SweepOptions {
  Mode mode = Mode::asymptotic;
  bool trusted_baseline = false;
  DecoyMethod estimator = DecoyMethod::lp;
  int jobs = 1;
  std::vector<double> mu_grid = default_mu_grid();
};

/// Points in the order of `distances`, which must be ascending.
std::vector<KeyRatePoint> sweep(const ExperimentParams& p, const std::vector<double>& distances,
                                const SweepOptions& opt);

/// Largest distance with a positive untrusted rate, or nullopt.
std::optional<double> last_positive_distance(const std::vector<KeyRatePoint>& points);

}  // namespace mdiqkd
