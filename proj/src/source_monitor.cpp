#include "mdiqkd/source_monitor.hpp"

#include "mdiqkd/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdiqkd {

MonitorModel MonitorModel::from(const ExperimentParams& p, const SideParams& side) {
  MonitorModel m;
  m.m_mean = side.m_mean;
  m.eta_id = p.eta_id;
  m.noise_variance = id_noise_variance(p);
  m.q = p.q;
  m.delta = p.delta;
  m.varsigma = p.varsigma;
  return m;
}

double tagged_ratio(const MonitorModel& model) {
  if (!(model.m_mean > 0.0)) throw std::domain_error("tagged_ratio: M must be positive");
  const double spread = std::sqrt(2.0 * (model.m_mean + model.noise_variance));
  const double arg = (model.delta * model.measured_mean() + model.varsigma) / spread;
  return std::clamp(stats::erfc(arg), 0.0, 1.0);
}

double epsilon_from_confidence(double tau, double k) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::domain_error("confidence must lie in (0,1)");
  if (!(k >= 1.0)) throw std::domain_error("k must be >= 1");
  return std::sqrt(-std::log1p(-tau) / k);
}

double sampling_violation_bound(double k, double epsilon) {
  return std::exp(-k * epsilon * epsilon);
}

double sampling_violation_bound_general(double k, double epsilon, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("beta must lie in (0,1)");
  return std::exp(-4.0 * k * epsilon * epsilon * beta * beta);
}

UntaggedStats untagged_stats(const MonitorModel& model, double tau, double k) {
  UntaggedStats s;
  s.delta_frac = tagged_ratio(model);
  s.epsilon_sample = epsilon_from_confidence(tau, k);
  s.confidence = tau;
  s.untagged_fraction = std::clamp(1.0 - s.delta_frac - s.epsilon_sample, 0.0, 1.0);
  return s;
}

UntaggedStats asymptotic_untagged_stats(const MonitorModel& model) {
  UntaggedStats s;
  s.delta_frac = tagged_ratio(model);
  s.epsilon_sample = 0.0;
  s.confidence = 1.0;
  s.untagged_fraction = std::clamp(1.0 - s.delta_frac, 0.0, 1.0);
  return s;
}

}  // namespace mdiqkd
