#include "mdiqkd/keyrate.hpp"

#include "mdiqkd/channel_model.hpp"
#include "mdiqkd/photon_stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mdiqkd {

Mode parse_mode(const std::string& s) {
  if (s == "asymptotic") return Mode::asymptotic;
  if (s == "finite") return Mode::finite;
  throw std::invalid_argument("unknown mode '" + s + "' (expected asymptotic or finite)");
}

const char* to_string(Mode m) { return m == Mode::asymptotic ? "asymptotic" : "finite"; }

double key_rate_raw(double fa, double fb, double q11_lower, double e11_upper, double q_sig, double e_sig,
                    double f_e) {
  const double privacy = e11_upper >= 0.5 ? 0.0 : fa * fb * q11_lower * (1.0 - binary_entropy(e11_upper));
  return privacy - q_sig * f_e * binary_entropy(std::min(e_sig, 0.5));
}

double key_rate(double fa, double fb, double q11_lower, double e11_upper, double q_sig, double e_sig,
                double f_e) {
  return std::max(0.0, key_rate_raw(fa, fb, q11_lower, e11_upper, q_sig, e_sig, f_e));
}

namespace {

ObservableSet channel_observables(const ExperimentParams& p, double distance_km) {
  return expected_observables(p, distance_km).observables;
}

}  // namespace

DecoyProblem build_decoy_problem(const ExperimentParams& p, double distance_km, const RateOptions& opt,
                                 UntaggedStats* stats_out) {
  DecoyProblem prob;
  prob.cut = p.cut;
  const int n_max = std::max(p.cut.a, p.cut.b) + 1;
  const auto gammas = p.intensities.as_array();
  UntaggedStats stats;
  if (opt.trusted) {
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < kIntensityCount; ++i) {
        prob.pnd[static_cast<std::size_t>(side)][static_cast<std::size_t>(i)] =
            poisson_pnd(gammas[static_cast<std::size_t>(i)], n_max);
      }
    }
  } else {
    const SideParams side = derive_side_params(p, distance_km);
    const MonitorModel monitor = MonitorModel::from(p, side);
    stats = opt.mode == Mode::finite ? untagged_stats(monitor, p.tau_conf, p.k_pulses)
                                     : asymptotic_untagged_stats(monitor);
    for (int s = 0; s < 2; ++s) {
      for (int i = 0; i < kIntensityCount; ++i) {
        prob.pnd[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)] =
            pnd_bounds(side.m_mean, p.delta, side.encoding_probability(i), n_max);
      }
    }
  }
  const ObservableSet obs = channel_observables(p, distance_km);
  const IntervalSet measured = opt.mode == Mode::finite
                                   ? finite_key_deviation(obs, p.epsilon_sec, p.fk_constraints)
                                   : IntervalSet::point(obs);
  const double f = stats.untagged_fraction;
  prob.bounds = untagged_intervals(measured, f, f);
  if (stats_out) *stats_out = stats;
  return prob;
}

RateEvaluation evaluate_rate(const ExperimentParams& p, double distance_km, const RateOptions& opt) {
  RateEvaluation ev;
  ev.mu = p.intensities.mu;
  DecoyProblem prob;
  try {
    validate(p);
    prob = build_decoy_problem(p, distance_km, opt, &ev.stats);
  } catch (const std::domain_error& e) {
    ev.admissible = false;
    ev.note = e.what();
    return ev;
  } catch (const ConfigError& e) {
    ev.admissible = false;
    ev.note = e.what();
    return ev;
  }
  if (opt.estimator == DecoyMethod::lp) {
    ev.bounds = estimate_lp(prob);
  } else {
    ev.bounds = estimate_analytical(prob.bounds, p.intensities);
    ev.bounds.q11_z_lower = prob.pnd[0][0].lower[1] * prob.pnd[1][0].lower[1] * ev.bounds.s11_z_lower;
  }
  const Observable sig = channel_observables(p, distance_km).at(Basis::Z, 0, 0);
  ev.q_sig = sig.gain;
  ev.e_sig = sig.qber;
  const double f = ev.stats.untagged_fraction;
  ev.raw_rate = key_rate_raw(f, f, ev.bounds.q11_z_lower, ev.bounds.e11_x_upper, ev.q_sig, ev.e_sig, p.f_e);
  ev.rate = std::max(0.0, ev.raw_rate);
  return ev;
}

std::vector<double> default_mu_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 19; ++i) g.push_back(0.05 * i);
  return g;
}

KeyRatePoint optimize_mu(const ExperimentParams& p, double distance_km, const std::vector<double>& grid,
                         const RateOptions& opt, bool refine) {
  if (grid.empty()) throw std::invalid_argument("optimize_mu: empty grid");
  bool have = false;
  RateEvaluation best;
  auto consider = [&](double mu) {
    ExperimentParams q = p;
    q.intensities.mu = mu;
    RateEvaluation ev = evaluate_rate(q, distance_km, opt);
    if (!have || ev.rate > best.rate || (ev.rate == best.rate && mu < best.mu)) {
      best = std::move(ev);
      have = true;
    }
  };
  for (double mu : grid) consider(mu);
  if (refine && grid.size() > 1 && best.rate > 0.0) {
    const double step = (grid[1] - grid[0]) / 5.0;
    const double centre = best.mu;
    for (int j = -4; j <= 4; ++j) {
      const double mu = centre + j * step;
      if (j == 0 || !(mu > p.intensities.nu) || mu > 1.0) continue;
      consider(mu);
    }
  }
  KeyRatePoint pt;
  pt.distance_km = distance_km;
  pt.mu_opt = best.mu;
  pt.rate_untrusted = best.rate;
  pt.raw_rate = best.raw_rate;
  pt.q11_lower = best.bounds.q11_z_lower;
  pt.e11_upper = best.bounds.e11_x_upper;
  pt.delta_frac = best.stats.delta_frac;
  pt.epsilon_sample = best.stats.epsilon_sample;
  return pt;
}

double trusted_baseline(const ExperimentParams& p, double distance_km, Mode mode) {
  RateOptions opt;
  opt.mode = mode;
  opt.trusted = true;
  return optimize_mu(p, distance_km, default_mu_grid(), opt).rate_untrusted;
}

std::vector<KeyRatePoint> sweep(const ExperimentParams& p, const std::vector<double>& distances,
                                const SweepOptions& opt) {
  if (!std::is_sorted(distances.begin(), distances.end())) {
    throw std::invalid_argument("sweep: distances must be ascending");
  }
  std::vector<KeyRatePoint> out(distances.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < distances.size(); i = next++) {
      try {
        RateOptions ro{opt.mode, opt.estimator, false};
        KeyRatePoint pt = optimize_mu(p, distances[i], opt.mu_grid, ro);
        if (opt.trusted_baseline) {
          ro.trusted = true;
          const KeyRatePoint tp = optimize_mu(p, distances[i], opt.mu_grid, ro);
          pt.rate_trusted = tp.rate_untrusted;
          pt.mu_opt_trusted = tp.mu_opt;
        }
        out[i] = pt;
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(distances.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::optional<double> last_positive_distance(const std::vector<KeyRatePoint>& points) {
  std::optional<double> last;
  for (const auto& pt : points) {
    if (pt.rate_untrusted > 0.0) last = pt.distance_km;
  }
  return last;
}

}  // namespace mdiqkd
