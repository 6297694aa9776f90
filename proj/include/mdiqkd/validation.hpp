#pragma once

#include "mdiqkd/channel_model.hpp"
#include "mdiqkd/lp_solver.hpp"
#include "mdiqkd/params.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mdiqkd {

enum class SuiteStatus { pass, fail, insufficient_statistics };

const char* to_string(SuiteStatus s);

struct CheckLine {
  std::string label;
  SuiteStatus status = SuiteStatus::pass;
  std::string detail;
};

struct SuiteResult {
  std::string name;
  SuiteStatus status = SuiteStatus::pass;
  std::vector<CheckLine> checks;
};

// --- Hoeffding sampling bound -------------------------------------------

struct HoeffdingCase {
  double k = 1e4;
  double epsilon = 0.01;
  double beta = 0.5;
  bool general = false;  ///< use exp(-4 k eps^2 beta^2)
  std::uint64_t trials = 100000;
  std::uint64_t violations = 0;
  double frequency = 0.0;
  double bound = 0.0;
};

/// Draws the encoding count V_e ~ Binomial(2k, beta) per trial, all 2k pulses
/// untagged, and counts V_e <= beta/(1-beta) (V_s - 2 eps k).
HoeffdingCase run_hoeffding_case(HoeffdingCase c, std::uint64_t seed);
SuiteResult hoeffding_suite(std::uint64_t seed, std::uint64_t trials = 100000);

// --- Channel oracle vs closed forms ---------------------------------------

struct OracleCheck {
  std::string label;
  ExperimentParams params;
  Basis basis = Basis::Z;
  int ia = 0;  ///< intensity index of Alice
  int ib = 0;
  double distance_km = 0.0;
  // Filled by run_oracle_check.
  Observable analytic;
  OracleEstimate estimate;
  double gain_z = 0.0;  ///< (estimate - analytic) / stderr
  double qber_z = 0.0;
  SuiteStatus status = SuiteStatus::pass;
};

/// Settings covered by the agreement suite.
std::vector<OracleCheck> default_oracle_checks(const ExperimentParams& p);
/// Fewer than 1e4 samples or fewer than 100 expected events count as
/// insufficient statistics; otherwise both gain and QBER must lie within
/// 3 standard errors.
void run_oracle_check(OracleCheck& c, std::uint64_t samples, std::uint64_t seed, int jobs);
SuiteResult channel_oracle_suite(const ExperimentParams& p, std::uint64_t samples, std::uint64_t seed,
                                 int jobs = 1, std::vector<OracleCheck>* out = nullptr);

/// Fixture CSV: label,basis,ia,ib,distance_km,samples,events,errors,gain,gain_stderr,qber,
/// qber_stderr,analytic_gain,analytic_qber,status
void write_oracle_csv(std::ostream& os, const std::vector<OracleCheck>& checks);

// --- LP vs vertex enumeration ---------------------------------------------

/// Random bounded program with n variables and m rows that has a feasible
/// point by construction.
lp::LinearProgram<double> random_lp_fixture(int n, int m, std::uint64_t seed);

/// Optimum by enumerating every basic solution (n active bounds or rows).
/// nullopt when no vertex is feasible.
std::optional<double> vertex_enumeration_optimum(const lp::LinearProgram<double>& prog, double feas_tol = 1e-9);

SuiteResult lp_enumeration_suite(std::uint64_t seed, int fixtures = 25, double tol = 1e-8);

// --- Poisson limit ----------------------------------------------------------

SuiteResult poisson_limit_suite();

// --- Driver -----------------------------------------------------------------

struct ValidationOptions {
  std::uint64_t seed = 20240611;
  std::uint64_t samples = 10'000'000;
  int jobs = 1;
};

std::vector<SuiteResult> run_validation(const ExperimentParams& p, const ValidationOptions& opt,
                                        std::vector<OracleCheck>* oracle_rows = nullptr);

/// Pass/fail table, one line per check and a summary line per suite.
void print_report(std::ostream& os, const std::vector<SuiteResult>& results);

/// True when no suite failed (insufficient statistics is not a failure).
bool all_passed(const std::vector<SuiteResult>& results);

}  // namespace mdiqkd
