#include "mdiqkd/channel_model.hpp"

#include "mdiqkd/photon_stats.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <vector>

namespace mdiqkd {

namespace {

// Detection modes, in this order everywhere below.
enum Mode { kEarly0 = 0, kEarly1 = 1, kLate0 = 2, kLate1 = 3 };
constexpr unsigned kSingletA = (1u << kEarly0) | (1u << kLate1);
constexpr unsigned kSingletB = (1u << kEarly1) | (1u << kLate0);

double bessel_i0(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

// P(click set is exactly one of the singlet patterns | modes in `occupied`
// hold photons), each empty mode firing a dark count with probability y0.
double singlet_probability(unsigned occupied, double y0) {
  double p = 0.0;
  for (unsigned pattern : {kSingletA, kSingletB}) {
    if ((occupied & ~pattern) != 0u) continue;
    const int dark = std::popcount(pattern & ~occupied);
    p += std::pow(y0, dark) * (1.0 - y0) * (1.0 - y0);
  }
  return p;
}

// Creation-operator coefficients over the four detection modes for a user's
// photon given basis and bit. Alice enters the even port, Bob the odd port.
std::array<double, 4> mode_coefficients(Basis basis, int bit, bool bob) {
  const double r = bob ? -1.0 : 1.0;
  if (basis == Basis::Z) {
    const double h = std::numbers::sqrt2 / 2.0;
    std::array<double, 4> c{};
    c[static_cast<std::size_t>(2 * bit)] = h;
    c[static_cast<std::size_t>(2 * bit + 1)] = r * h;
    return c;
  }
  const double s = bit == 0 ? 1.0 : -1.0;
  return {0.5, 0.5 * r, 0.5 * s, 0.5 * s * r};
}

constexpr int kMaxFockPhotons = 10;

// For every (basis, bit_a, bit_b, k_a, k_b) with k <= kMaxFockPhotons photons
// reaching the beam splitter: the probability of each occupied-mode mask.
class FockTable {
 public:
  static const FockTable& instance() {
    static const FockTable table;
    return table;
  }

  const std::array<double, 16>& masks(Basis basis, int bit_a, int bit_b, int ka, int kb) const {
    return data_[index(basis, bit_a, bit_b, ka, kb)];
  }

 private:
  static std::size_t index(Basis basis, int bit_a, int bit_b, int ka, int kb) {
    constexpr int n = kMaxFockPhotons + 1;
    return static_cast<std::size_t>((((static_cast<int>(basis) * 2 + bit_a) * 2 + bit_b) * n + ka) * n +
                                    kb);
  }

  using State = std::unordered_map<std::uint32_t, double>;

  static State apply(const State& in, const std::array<double, 4>& coeff) {
    State out;
    out.reserve(in.size() * 4);
    for (const auto& [key, amp] : in) {
      for (int j = 0; j < 4; ++j) {
        if (coeff[static_cast<std::size_t>(j)] == 0.0) continue;
        out[key + (1u << (8 * j))] += amp * coeff[static_cast<std::size_t>(j)];
      }
    }
    return out;
  }

  FockTable() {
    constexpr int n = kMaxFockPhotons + 1;
    data_.resize(static_cast<std::size_t>(2 * 2 * 2 * n * n));
    std::array<double, 2 * kMaxFockPhotons + 1> factorial{};
    factorial[0] = 1.0;
    for (std::size_t i = 1; i < factorial.size(); ++i) factorial[i] = factorial[i - 1] * i;
    for (Basis basis : {Basis::Z, Basis::X}) {
      for (int bit_a = 0; bit_a < 2; ++bit_a) {
        for (int bit_b = 0; bit_b < 2; ++bit_b) {
          const auto ca = mode_coefficients(basis, bit_a, false);
          const auto cb = mode_coefficients(basis, bit_b, true);
          State alice{{0u, 1.0}};
          for (int ka = 0; ka < n; ++ka) {
            State both = alice;
            for (int kb = 0; kb < n; ++kb) {
              auto& out = data_[index(basis, bit_a, bit_b, ka, kb)];
              out.fill(0.0);
              for (const auto& [key, amp] : both) {
                double weight = amp * amp;
                unsigned mask = 0;
                for (int j = 0; j < 4; ++j) {
                  const unsigned count = (key >> (8 * j)) & 0xffu;
                  weight *= factorial[count];
                  if (count > 0) mask |= 1u << j;
                }
                out[mask] += weight / (factorial[static_cast<std::size_t>(ka)] *
                                       factorial[static_cast<std::size_t>(kb)]);
              }
              both = apply(both, cb);
            }
            alice = apply(alice, ca);
          }
        }
      }
    }
  }

  std::vector<std::array<double, 16>> data_;
};

double detector_mean(const ExperimentParams& p, double gamma, double t_side) {
  return gamma * t_side * p.eta_d;
}

}  // namespace

double YieldTable::error_rate(Basis b, int na, int nb) const {
  const double y = yield(b)(na, nb);
  return y > 0.0 ? error_yield(b)(na, nb) / y : 0.0;
}

Observable wcp_observable(Basis basis, double mean_a, double mean_b, double y0, double e_d) {
  Observable o;
  const double total = mean_a + mean_b;
  if (basis == Basis::Z) {
    // Different bins: no interference, each bin split evenly over D0/D1.
    const double correct = (1.0 - y0) * (1.0 - y0) * std::exp(-total / 2.0) *
                           (1.0 - (1.0 - y0) * std::exp(-mean_a / 2.0)) *
                           (1.0 - (1.0 - y0) * std::exp(-mean_b / 2.0));
    // Same bin: phase-averaged interference in one bin, dark count in the other.
    const double wrong = y0 * (1.0 - y0) * (1.0 - y0) * std::exp(-total / 2.0) *
                         (bessel_i0(std::sqrt(mean_a * mean_b)) - (1.0 - y0) * std::exp(-total / 2.0));
    o.gain = correct + wrong;
    const double err = e_d * correct + (1.0 - e_d) * wrong;
    o.qber = o.gain > 0.0 ? err / o.gain : 0.0;
    return o;
  }
  const double x = std::sqrt(mean_a * mean_b) / 2.0;
  const double y = (1.0 - y0) * std::exp(-total / 4.0);
  const double i0x = bessel_i0(x);
  const double equal_bits = 2.0 * y * y * (1.0 + y * y - 2.0 * y * i0x);
  const double opposite_bits = 2.0 * y * y * (bessel_i0(2.0 * x) - 2.0 * y * i0x + y * y);
  o.gain = 0.5 * (equal_bits + opposite_bits);
  const double err = 0.5 * ((1.0 - e_d) * equal_bits + e_d * opposite_bits);
  o.qber = o.gain > 0.0 ? err / o.gain : 0.0;
  return o;
}

double pairs_per_cell(const ExperimentParams& p) {
  return p.k_pulses / (2.0 * kIntensityCount * kIntensityCount);
}

ChannelPoint expected_observables(const ExperimentParams& p, double distance_km) {
  ChannelPoint point;
  point.distance_km = distance_km;
  point.t_side = side_transmittance(p, distance_km);
  const auto gammas = p.intensities.as_array();
  const double count = pairs_per_cell(p);
  for (Basis b : {Basis::Z, Basis::X}) {
    for (int ia = 0; ia < kIntensityCount; ++ia) {
      for (int ib = 0; ib < kIntensityCount; ++ib) {
        auto o = wcp_observable(b, detector_mean(p, gammas[static_cast<std::size_t>(ia)], point.t_side),
                                detector_mean(p, gammas[static_cast<std::size_t>(ib)], point.t_side),
                                p.y0, p.e_d);
        o.pair_count = count;
        point.observables.at(b, ia, ib) = o;
      }
    }
  }
  return point;
}

void fock_yield(Basis basis, int na, int nb, double eta_a, double eta_b, double y0, double e_d,
                double& yield, double& error_yield) {
  if (na < 0 || nb < 0 || na > kMaxFockPhotons || nb > kMaxFockPhotons) {
    throw std::domain_error("fock_yield: photon number outside the tabulated range");
  }
  const auto& table = FockTable::instance();
  std::array<double, 16> mask_event{};
  for (unsigned m = 0; m < 16; ++m) mask_event[m] = singlet_probability(m, y0);
  yield = 0.0;
  error_yield = 0.0;
  for (int ka = 0; ka <= na; ++ka) {
    const double wa = binomial_pmf(ka, na, eta_a);
    if (wa == 0.0) continue;
    for (int kb = 0; kb <= nb; ++kb) {
      const double wb = binomial_pmf(kb, nb, eta_b);
      if (wb == 0.0) continue;
      for (int bit_a = 0; bit_a < 2; ++bit_a) {
        for (int bit_b = 0; bit_b < 2; ++bit_b) {
          const auto& masks = table.masks(basis, bit_a, bit_b, ka, kb);
          double event = 0.0;
          for (unsigned m = 0; m < 16; ++m) event += masks[m] * mask_event[m];
          const double w = 0.25 * wa * wb * event;
          yield += w;
          error_yield += w * (bit_a == bit_b ? 1.0 - e_d : e_d);
        }
      }
    }
  }
}

YieldTable true_untagged_yields(const ExperimentParams& p, double distance_km, PhotonCut cut) {
  if (cut.a < 0 || cut.b < 0) throw std::domain_error("true_untagged_yields: negative cut");
  const double eta = p.eta_d * side_transmittance(p, distance_km);
  YieldTable t;
  for (auto* m : {&t.yield_z, &t.error_yield_z, &t.yield_x, &t.error_yield_x}) {
    m->setZero(cut.a + 1, cut.b + 1);
  }
  for (int na = 0; na <= cut.a; ++na) {
    for (int nb = 0; nb <= cut.b; ++nb) {
      fock_yield(Basis::Z, na, nb, eta, eta, p.y0, p.e_d, t.yield_z(na, nb), t.error_yield_z(na, nb));
      fock_yield(Basis::X, na, nb, eta, eta, p.y0, p.e_d, t.yield_x(na, nb), t.error_yield_x(na, nb));
    }
  }
  return t;
}

namespace {

constexpr std::uint64_t kBatchSize = 1u << 16;

struct Tally {
  std::uint64_t samples = 0;
  std::uint64_t events = 0;
  std::uint64_t errors = 0;
};

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Tally run_batch(Basis basis, double mean_a, double mean_b, double y0, double e_d,
                std::uint64_t samples, std::uint64_t seed, std::uint64_t batch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(batch >> 32)};
  std::mt19937_64 rng(seq);
  Tally tally;
  tally.samples = samples;
  const double cross = std::sqrt(mean_a * mean_b);
  for (std::uint64_t s = 0; s < samples; ++s) {
    const int bit_a = static_cast<int>(rng() >> 63);
    const int bit_b = static_cast<int>(rng() >> 63);
    const double phase = 2.0 * std::numbers::pi * uniform01(rng);
    std::array<double, 4> intensity{};
    if (basis == Basis::Z) {
      if (bit_a != bit_b) {
        intensity[static_cast<std::size_t>(2 * bit_a)] = mean_a / 2.0;
        intensity[static_cast<std::size_t>(2 * bit_a + 1)] = mean_a / 2.0;
        intensity[static_cast<std::size_t>(2 * bit_b)] = mean_b / 2.0;
        intensity[static_cast<std::size_t>(2 * bit_b + 1)] = mean_b / 2.0;
      } else {
        const double beat = cross * std::cos(phase);
        intensity[static_cast<std::size_t>(2 * bit_a)] = (mean_a + mean_b) / 2.0 + beat;
        intensity[static_cast<std::size_t>(2 * bit_a + 1)] = (mean_a + mean_b) / 2.0 - beat;
      }
    } else {
      const double base = (mean_a + mean_b) / 4.0;
      const double beat_early = 0.5 * cross * std::cos(phase);
      const double beat_late = bit_a == bit_b ? beat_early : -beat_early;
      intensity = {base + beat_early, base - beat_early, base + beat_late, base - beat_late};
    }
    unsigned clicks = 0;
    for (int j = 0; j < 4; ++j) {
      // A detection mode fires when its thinned Poisson photon number is
      // non-zero or it dark-counts.
      const bool photon = uniform01(rng) < -std::expm1(-intensity[static_cast<std::size_t>(j)]);
      const bool dark = uniform01(rng) < y0;
      if (photon || dark) clicks |= 1u << j;
    }
    const bool flip = uniform01(rng) < e_d;
    if (clicks == kSingletA || clicks == kSingletB) {
      ++tally.events;
      if ((bit_a == bit_b) != flip) ++tally.errors;
    }
  }
  return tally;
}

}  // namespace

OracleEstimate basis_oracle(const ExperimentParams& p, Basis basis, double gamma_a,
                            double gamma_b, double distance_km, std::uint64_t n_samples,
                            std::uint64_t seed, int jobs) {
  const double t = side_transmittance(p, distance_km);
  const double mean_a = detector_mean(p, gamma_a, t);
  const double mean_b = detector_mean(p, gamma_b, t);
  const std::uint64_t batches = (n_samples + kBatchSize - 1) / kBatchSize;
  std::vector<Tally> tallies(batches);
  auto work = [&](std::uint64_t first, std::uint64_t stride) {
    for (std::uint64_t b = first; b < batches; b += stride) {
      const std::uint64_t size = std::min(kBatchSize, n_samples - b * kBatchSize);
      tallies[b] = run_batch(basis, mean_a, mean_b, p.y0, p.e_d, size, seed, b);
    }
  };
  const auto workers = static_cast<std::uint64_t>(std::max(1, jobs));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::uint64_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }
  OracleEstimate est;
  for (const auto& t : tallies) {
    est.samples += t.samples;
    est.events += t.events;
    est.errors += t.errors;
  }
  const double n = static_cast<double>(est.samples);
  est.gain = n > 0 ? static_cast<double>(est.events) / n : 0.0;
  est.gain_stderr = n > 0 ? std::sqrt(est.gain * (1.0 - est.gain) / n) : 0.0;
  if (est.events > 0) {
    const double ev = static_cast<double>(est.events);
    est.qber = static_cast<double>(est.errors) / ev;
    est.qber_stderr = std::sqrt(est.qber * (1.0 - est.qber) / ev);
  }
  return est;
}

OracleEstimate z_basis_oracle(const ExperimentParams& p, double gamma_a, double gamma_b,
                              double distance_km, std::uint64_t n_samples, std::uint64_t seed) {
  return basis_oracle(p, Basis::Z, gamma_a, gamma_b, distance_km, n_samples, seed, 1);
}

}  // namespace mdiqkd
