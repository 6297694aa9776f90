#include "mdiqkd/channel_model.hpp"

#include "mdiqkd/photon_stats.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>

using namespace mdiqkd;

namespace {

ExperimentParams ideal_detectors() {
  ExperimentParams p;
  p.eta_d = 1.0;
  p.y0 = 0.0;
  p.e_d = 0.0;
  return p;
}

// Two single photons meet at a 50:50 splitter; each is a time-bin qubit with
// amplitudes (early, late). Enumerates the two-photon output terms and keeps
// the two singlet click patterns {D0 early, D1 late} and {D1 early, D0 late}.
// Returns (success probability, error probability) averaged over the basis
// states of both users.
std::array<double, 2> enumerate_single_photon_pair(Basis basis) {
  using C = std::complex<double>;
  const double r = 1.0 / std::sqrt(2.0);
  std::array<std::array<C, 2>, 2> states;
  if (basis == Basis::Z) {
    states = {{{C(1, 0), C(0, 0)}, {C(0, 0), C(1, 0)}}};
  } else {
    states = {{{C(r, 0), C(r, 0)}, {C(r, 0), C(-r, 0)}}};
  }
  double success = 0.0, error = 0.0;
  for (int bit_a = 0; bit_a < 2; ++bit_a) {
    for (int bit_b = 0; bit_b < 2; ++bit_b) {
      const auto& a = states[bit_a];
      const auto& b = states[bit_b];
      // Output mode (bin, detector); Alice's port maps to (D0 + D1)/sqrt2,
      // Bob's to (D0 - D1)/sqrt2.
      C amp[2][2][2][2] = {};
      for (int ta = 0; ta < 2; ++ta)
        for (int tb = 0; tb < 2; ++tb)
          for (int da = 0; da < 2; ++da)
            for (int db = 0; db < 2; ++db) {
              const double sa = r, sb = db == 0 ? r : -r;
              amp[ta][da][tb][db] += a[ta] * b[tb] * sa * sb;
            }
      // Photons in distinct modes are distinguishable by mode; symmetrise.
      auto pattern = [&](int t1, int d1, int t2, int d2) {
        const C total = amp[t1][d1][t2][d2] + amp[t2][d2][t1][d1];
        return std::norm(total);
      };
      const double p = pattern(0, 0, 1, 1) + pattern(0, 1, 1, 0);
      success += p / 4.0;
      if (bit_a == bit_b) error += p / 4.0;  // singlet flags anticorrelated bits
    }
  }
  return {success, error};
}

double forward_gain(const YieldTable& y, Basis basis, double ga, double gb, bool error) {
  const auto& table = error ? y.error_yield(basis) : y.yield(basis);
  double s = 0.0;
  for (int na = 0; na < table.rows(); ++na)
    for (int nb = 0; nb < table.cols(); ++nb) s += poisson_pmf(na, ga) * poisson_pmf(nb, gb) * table(na, nb);
  return s;
}

}  // namespace

TEST_SUITE("channel_model") {

TEST_CASE("single-photon pair yields match the mode enumeration") {
  const ExperimentParams p = ideal_detectors();
  const YieldTable y = true_untagged_yields(p, 0.0, {3, 3});
  for (Basis b : {Basis::Z, Basis::X}) {
    const auto ref = enumerate_single_photon_pair(b);
    CHECK(ref[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(y.yield(b)(1, 1) == doctest::Approx(ref[0]).epsilon(1e-12));
    CHECK(y.error_yield(b)(1, 1) == doctest::Approx(ref[1]).scale(1.0).epsilon(1e-12));
  }
  CHECK(y.error_rate(Basis::X, 1, 1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("dark-count-free edge cases") {
  ExperimentParams p;
  p.y0 = 0.0;
  const YieldTable y = true_untagged_yields(p, 30.0, p.cut);
  CHECK(y.yield_z(0, 0) == 0.0);
  CHECK(y.yield_x(0, 0) == 0.0);
  p.e_d = 0.0;
  CHECK(true_untagged_yields(p, 30.0, p.cut).error_rate(Basis::X, 1, 1) == doctest::Approx(0.0).scale(1.0));
  const auto obs = expected_observables(ideal_detectors(), 0.0).observables;
  CHECK(obs.at(Basis::Z, 0, 0).qber == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("closed forms bracket forward sums of the Fock yields") {
  // Yields are at most one, so the truncated sum can miss at most the
  // Poisson mass beyond the table on either side. The closed forms subtract
  // exponentials near one, which costs about 1e-16 absolute.
  ExperimentParams p;
  const int cut = 10;
  for (double L : {0.0, 80.0, 200.0}) {
    const ChannelPoint cp = expected_observables(p, L);
    const YieldTable y = true_untagged_yields(p, L, {cut, cut});
    const auto g = p.intensities.as_array();
    for (Basis b : {Basis::Z, Basis::X}) {
      for (int ia = 0; ia < 3; ++ia) {
        for (int ib = 0; ib < 3; ++ib) {
          const Observable& o = cp.observables.at(b, ia, ib);
          const double tail = poisson_upper_tail(cut, g[ia]) + poisson_upper_tail(cut, g[ib]);
          CAPTURE(L);
          CAPTURE(ia);
          CAPTURE(ib);
          for (bool err : {false, true}) {
            const double closed = err ? o.error_gain() : o.gain;
            const double gap = closed - forward_gain(y, b, g[ia], g[ib], err);
            CHECK(gap >= -1e-13 * closed - 1e-15);
            CHECK(gap <= tail + 1e-13 * closed + 1e-15);
          }
        }
      }
    }
  }
}

TEST_CASE("vacuum inputs: dark counts only, QBER one half") {
  ExperimentParams p;
  p.y0 = 1e-2;
  const Observable o = expected_observables(p, 0.0).observables.at(Basis::Z, 2, 2);
  CHECK(o.qber == doctest::Approx(0.5).epsilon(1e-12));
  const OracleEstimate mc = basis_oracle(p, Basis::Z, 0.0, 0.0, 0.0, 4000000, 99);
  CHECK(std::abs(mc.gain - o.gain) <= 3.0 * mc.gain_stderr);
  CHECK(std::abs(mc.qber - 0.5) <= 3.0 * mc.qber_stderr);
}

TEST_CASE("Z oracle at 100 km agrees with the closed form") {
  const ExperimentParams p;
  const Observable o = expected_observables(p, 100.0).observables.at(Basis::Z, 0, 0);
  const OracleEstimate mc = z_basis_oracle(p, 0.5, 0.5, 100.0, 10000000, 2024);
  CHECK(mc.samples == 10000000);
  CHECK(std::abs(mc.gain - o.gain) <= 3.0 * mc.gain_stderr);
}

TEST_CASE("oracle gain is exactly zero without light or dark counts") {
  ExperimentParams p;
  p.y0 = 0.0;
  const OracleEstimate mc = z_basis_oracle(p, 0.0, 0.0, 0.0, 200000, 5);
  CHECK(mc.events == 0);
  CHECK(mc.gain == 0.0);
}

TEST_CASE("oracle is a pure function of its inputs and seed") {
  const ExperimentParams p;
  const OracleEstimate a = basis_oracle(p, Basis::X, 0.5, 0.01, 20.0, 300000, 17, 1);
  const OracleEstimate b = basis_oracle(p, Basis::X, 0.5, 0.01, 20.0, 300000, 17, 1);
  const OracleEstimate c = basis_oracle(p, Basis::X, 0.5, 0.01, 20.0, 300000, 17, 3);
  CHECK(a.events == b.events);
  CHECK(a.errors == b.errors);
  CHECK(a.events == c.events);
  CHECK(a.errors == c.errors);
  const OracleEstimate d = basis_oracle(p, Basis::X, 0.5, 0.01, 20.0, 300000, 18, 1);
  CHECK(d.events != a.events);
}

TEST_CASE("three-sigma intervals cover the closed form for nearly all seeds") {
  const ExperimentParams p;
  const Observable o = expected_observables(p, 0.0).observables.at(Basis::Z, 0, 0);
  const int seeds = 300;
  int covered = 0;
  for (int s = 0; s < seeds; ++s) {
    const OracleEstimate mc = z_basis_oracle(p, 0.5, 0.5, 0.0, 20000, 1000 + s);
    if (std::abs(mc.gain - o.gain) <= 3.0 * mc.gain_stderr) ++covered;
  }
  CHECK(covered >= 297);
}

TEST_CASE("gains fall with distance and the X QBER tends to one half") {
  const ExperimentParams p;
  double last = 1.0;
  for (double L = 0.0; L <= 400.0; L += 20.0) {
    const double g = expected_observables(p, L).observables.at(Basis::Z, 0, 0).gain;
    CHECK(g <= last);
    last = g;
  }
  CHECK(expected_observables(p, 600.0).observables.at(Basis::X, 0, 0).qber == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("pairs per cell split k over nine pairs and two bases") {
  const ExperimentParams p;
  CHECK(pairs_per_cell(p) == doctest::Approx(p.k_pulses / 18.0));
  const auto obs = expected_observables(p, 10.0).observables;
  REQUIRE(obs.at(Basis::X, 1, 2).pair_count.has_value());
  CHECK(*obs.at(Basis::X, 1, 2).pair_count == doctest::Approx(p.k_pulses / 18.0));
}

}  // TEST_SUITE
