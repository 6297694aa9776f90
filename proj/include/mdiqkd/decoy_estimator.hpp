#pragma once

#include "mdiqkd/lp_solver.hpp"
#include "mdiqkd/observable_bounds.hpp"
#include "mdiqkd/params.hpp"
#include "mdiqkd/pnd_bounds.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdiqkd {

enum class DecoyMethod { lp, analytical };

class InconsistentObservables : public std::runtime_error {
 public:
  InconsistentObservables() : std::runtime_error("observables inconsistent with PND bounds") {}
};

/// Which of the three decoy programs a constraint or solve belongs to.
enum class DecoyProgram { s11_z, s11_x, se11_x };

struct ConstraintRecord {
  DecoyProgram program = DecoyProgram::s11_z;
  int ia = 0;
  int ib = 0;
  bool upper_row = true;  ///< sum P_lower P_lower S <= upper, else sum P_upper P_upper S >= lower - slack
  bool vacuous = false;   ///< lower row dropped because its limit is <= 0
  bool active = false;
  double limit = 0.0;
};

struct DecoyDiagnostics {
  std::vector<ConstraintRecord> constraints;
  std::array<int, 3> iterations{};
  std::array<double, 3> dual_gap{};
};

struct DecoyBounds {
  double s11_z_lower = 0.0;
  double e11_x_upper = 0.0;
  double q11_z_lower = 0.0;
  double s11_x_lower = 0.0;
  double se11_x_upper = 0.0;
  DecoyMethod method = DecoyMethod::lp;
  DecoyDiagnostics diagnostics;
};

/// Inputs of the linear-programming estimator. `pnd[side][intensity]` must
/// tabulate at least cut + 1 photon numbers.
struct DecoyProblem {
  IntervalSet bounds;  ///< untagged gain and error-gain intervals
  std::array<std::array<PndBounds, kIntensityCount>, 2> pnd;
  PhotonCut cut{};
};

/// Mass outside the cut for both sides: 1 - (1 - t_a)(1 - t_b).
double truncation_slack(const PndBounds& a, const PndBounds& b, PhotonCut cut);

/// The LP instance of one program (for inspection and dumps).
lp::LinearProgram<double> build_decoy_program(const DecoyProblem& problem, DecoyProgram which,
                                              std::vector<ConstraintRecord>* records = nullptr);

/// Variable index of S_{na nb} in build_decoy_program's layout.
inline Eigen::Index decoy_var(PhotonCut cut, int na, int nb) { return na * (cut.b + 1) + nb; }

/// Throws InconsistentObservables when a program is infeasible and
/// std::runtime_error on solver breakdown.
DecoyBounds estimate_lp(const DecoyProblem& problem, double tol = 1e-9);

/// Closed-form three-intensity bounds (Poisson source limit). Throws
/// std::domain_error("degenerate intensities") when mu == nu or nu == omega.
DecoyBounds estimate_analytical(const IntervalSet& bounds, const Intensities& in);

/// S_11 lower bound of the closed form for one basis, unclamped.
double analytical_s11_lower(const IntervalSet& bounds, Basis basis, const Intensities& in);
/// (S e)_11 upper bound in the X basis, unclamped.
double analytical_se11_upper(const IntervalSet& bounds, const Intensities& in);

/// e11 from a numerator bound and an S_11 lower bound, with the zero-gain rule.
double error_rate_bound(double se11_upper, double s11_lower);

std::string decoy_report(const DecoyBounds& b);

}  // namespace mdiqkd
