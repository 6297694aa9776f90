#pragma once

#include "mdiqkd/params.hpp"

namespace mdiqkd {

/// Monitoring unit of one user: the intensity detector sees M' = M eta_id (1-q)
/// on average with Gaussian read noise, and pulses whose measured count falls
/// inside [(1-delta)M' + varsigma, (1+delta)M' - varsigma] count as untagged.
/// The measured count is modelled as Gaussian with variance M + sigma_ID^2.
struct MonitorModel {
  double m_mean = 0.0;
  double eta_id = 1.0;
  double noise_variance = 0.0;  ///< sigma_ID^2, photons^2
  double q = 0.01;
  double delta = 0.01;
  double varsigma = 0.0;

  double measured_mean() const { return m_mean * eta_id * (1.0 - q); }

  static MonitorModel from(const ExperimentParams& p, const SideParams& side);
};

struct UntaggedStats {
  double delta_frac = 0.0;      ///< tagged ratio
  double epsilon_sample = 0.0;  ///< sampling fluctuation
  double confidence = 0.0;
  double untagged_fraction = 1.0;  ///< max(0, 1 - delta_frac - epsilon_sample)
};

/// Delta = 1 - erf((delta M' + varsigma) / sqrt(2 M + 2 sigma_ID^2)).
double tagged_ratio(const MonitorModel& model);

/// Smallest epsilon reaching confidence tau for k pulse pairs:
/// epsilon = sqrt(-ln(1 - tau) / k).
double epsilon_from_confidence(double tau, double k);

/// exp(-k eps^2): bound on P(V_e <= V_s - 2 eps k) for a 50/50 assignment.
double sampling_violation_bound(double k, double epsilon);

/// exp(-4 k eps^2 beta^2): bound on P(V_e <= beta/(1-beta) (V_s - 2 eps k)) when
/// a pulse becomes an encoding pulse with probability beta.
double sampling_violation_bound_general(double k, double epsilon, double beta);

UntaggedStats untagged_stats(const MonitorModel& model, double tau, double k);

/// Infinite-key limit: epsilon = 0, confidence 1.
UntaggedStats asymptotic_untagged_stats(const MonitorModel& model);

}  // namespace mdiqkd
