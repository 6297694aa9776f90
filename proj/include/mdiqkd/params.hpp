#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace mdiqkd {

/// Signal, weak decoy and vacuum mean output photon numbers per pulse.
struct Intensities {
  double mu = 0.5;
  double nu = 0.01;
  double omega = 0.0;

  std::array<double, 3> as_array() const { return {mu, nu, omega}; }
  double operator[](int i) const { return as_array()[static_cast<std::size_t>(i)]; }
};

/// Photon-number truncation of the decoy programs: n_a <= a, n_b <= b.
struct PhotonCut {
  int a = 7;
  int b = 7;
};

/// Hardware constants plus protocol operating choices. Defaults reproduce the
/// simulation setting used throughout the project (ID-220 class detectors, a
/// 1e9-photon source at the relay).
struct ExperimentParams {
  double eta_d = 0.20;
  double y0 = 3e-6;
  double e_d = 0.001;
  double rep_rate = 75e6;
  double alpha_db_per_km = 0.21;
  double eta_id = 0.7;
  /// Intensity-detector read noise as tabulated; its unit is set by
  /// sigma_id_is_variance (photons^2 when true, photons when false).
  double sigma_id = 6.55e4;
  bool sigma_id_is_variance = true;
  double q = 0.01;
  double k_pulses = 3.5e13;
  double epsilon_sec = 1e-10;
  double m_c = 1e9;
  double delta = 0.01;
  double varsigma = 0.0;
  double f_e = 1.16;
  Intensities intensities{};
  double tau_conf = 1.0 - 1e-7;
  PhotonCut cut{};
  int fk_constraints = 18;
};

/// Read-noise variance of the intensity detector in photons^2.
inline double id_noise_variance(const ExperimentParams& p) {
  return p.sigma_id_is_variance ? p.sigma_id : p.sigma_id * p.sigma_id;
}

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-side quantities at one total distance (symmetric links).
struct SideParams {
  double distance_km = 0.0;
  double m_mean = 0.0;                 ///< M: mean photons entering a user's lab
  double m_measured = 0.0;             ///< M' = M eta_id (1-q)
  double channel_transmittance = 1.0;  ///< one way, one side
  std::array<double, 3> lambda{};      ///< internal transmittance per intensity

  /// Binomial success probability lambda*q of the encoding arm.
  double encoding_probability(int intensity) const {
    return lambda[static_cast<std::size_t>(intensity)] * encoding_tap;
  }
  double encoding_tap = 0.01;
};

/// Throws ConfigError naming the violated invariant.
void validate(const ExperimentParams& p);

/// Reads the flat `key = value` format (see config/table1.conf). Omitted keys
/// keep their defaults; unknown keys are rejected.
ExperimentParams load_config(const std::filesystem::path& path);
ExperimentParams parse_config(const std::string& text);

/// Renders every field in the load_config format.
std::string to_config_string(const ExperimentParams& p);

/// Throws std::domain_error when the untagged weak-output condition
/// (1+delta) M lambda q < 1 fails or a required lambda exceeds 1.
SideParams derive_side_params(const ExperimentParams& p, double distance_km);

/// One-way transmittance of a single side for a total (two-sided) distance.
double side_transmittance(const ExperimentParams& p, double distance_km);

}  // namespace mdiqkd
