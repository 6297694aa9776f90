#pragma once

#include "mdiqkd/observable_bounds.hpp"
#include "mdiqkd/params.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

namespace mdiqkd {

// Detector model shared by every routine in this header: time-bin encoding,
// a 50:50 beam splitter at the relay, two threshold detectors D0/D1 watched in
// an early and a late bin (four detection modes), independent dark counts y0
// per mode, detection efficiency folded into the channel loss. A successful
// event is the singlet pattern: exactly {D0 early, D1 late} or exactly
// {D1 early, D0 late} click. The singlet flags anticorrelated bits in both
// bases; misalignment flips the sifted outcome with probability e_d.

/// Fock-input yields Y_{n_a n_b} and error yields Y_{n_a n_b} e_{n_a n_b},
/// indexed (n_a, n_b).
struct YieldTable {
  Eigen::MatrixXd yield_z;
  Eigen::MatrixXd error_yield_z;
  Eigen::MatrixXd yield_x;
  Eigen::MatrixXd error_yield_x;

  const Eigen::MatrixXd& yield(Basis b) const { return b == Basis::Z ? yield_z : yield_x; }
  const Eigen::MatrixXd& error_yield(Basis b) const {
    return b == Basis::Z ? error_yield_z : error_yield_x;
  }
  double error_rate(Basis b, int na, int nb) const;
};

struct ChannelPoint {
  double distance_km = 0.0;
  double t_side = 1.0;  ///< one-way channel transmittance per side
  ObservableSet observables;
  std::optional<YieldTable> yields;
};

/// Gain and error gain of phase-randomised coherent inputs whose mean photon
/// numbers at the detectors are mean_a, mean_b.
Observable wcp_observable(Basis basis, double mean_a, double mean_b, double y0, double e_d);

/// Pulse pairs per (intensity pair, basis) cell: the k encoded pairs spread
/// uniformly over nine intensity pairs and two bases.
double pairs_per_cell(const ExperimentParams& p);

/// Observables for all nine intensity pairs in both bases at one distance.
ChannelPoint expected_observables(const ExperimentParams& p, double distance_km);

/// Yields for Fock inputs n_a, n_b through per-photon transmittances eta_a,
/// eta_b (channel times detector efficiency).
void fock_yield(Basis basis, int na, int nb, double eta_a, double eta_b, double y0, double e_d,
                double& yield, double& error_yield);

/// Yields over 0..cut.a x 0..cut.b for the configured channel at a distance.
YieldTable true_untagged_yields(const ExperimentParams& p, double distance_km, PhotonCut cut);

struct OracleEstimate {
  std::uint64_t samples = 0;
  std::uint64_t events = 0;
  std::uint64_t errors = 0;
  double gain = 0.0;
  double qber = 0.0;
  double gain_stderr = 0.0;
  double qber_stderr = 0.0;
};

/// Monte Carlo of the detector model: per sample, random bits, a random
/// relative phase, thinned Poisson photon numbers per detection mode, dark
/// counts, the singlet coincidence rule and the misalignment flip. Samples are
/// drawn in fixed batches with independent per-batch seeds, so the result is a
/// pure function of (inputs, seed) for any `jobs`.
OracleEstimate basis_oracle(const ExperimentParams& p, Basis basis, double gamma_a,
                            double gamma_b, double distance_km, std::uint64_t n_samples,
                            std::uint64_t seed, int jobs = 1);

OracleEstimate z_basis_oracle(const ExperimentParams& p, double gamma_a, double gamma_b,
                              double distance_km, std::uint64_t n_samples, std::uint64_t seed);

}  // namespace mdiqkd
