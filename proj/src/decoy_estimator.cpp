#include "mdiqkd/decoy_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mdiqkd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* program_name(DecoyProgram p) {
  switch (p) {
    case DecoyProgram::s11_z: return "min S11 (Z)";
    case DecoyProgram::s11_x: return "min S11 (X)";
    case DecoyProgram::se11_x: return "max S11*e11 (X)";
  }
  return "?";
}

const BoundedObservable& row_source(const ObservableInterval& cell, DecoyProgram which) {
  return which == DecoyProgram::se11_x ? cell.error_gain : cell.gain;
}

}  // namespace

double truncation_slack(const PndBounds& a, const PndBounds& b, PhotonCut cut) {
  const double ta = a.excess_mass(cut.a);
  const double tb = b.excess_mass(cut.b);
  return 1.0 - (1.0 - ta) * (1.0 - tb);
}

lp::LinearProgram<double> build_decoy_program(const DecoyProblem& problem, DecoyProgram which,
                                              std::vector<ConstraintRecord>* records) {
  const PhotonCut cut = problem.cut;
  if (cut.a < 2 || cut.b < 2) throw std::invalid_argument("decoy program: cut must be >= 2 per side");
  const Eigen::Index nvar = (cut.a + 1) * (cut.b + 1);
  lp::LinearProgram<double> prog(nvar);
  const Basis basis = which == DecoyProgram::s11_z ? Basis::Z : Basis::X;
  prog.sense = which == DecoyProgram::se11_x ? lp::Sense::maximize : lp::Sense::minimize;
  prog.objective(decoy_var(cut, 1, 1)) = 1.0;

  Eigen::VectorXd lower_coeff(nvar), upper_coeff(nvar);
  for (int ia = 0; ia < kIntensityCount; ++ia) {
    for (int ib = 0; ib < kIntensityCount; ++ib) {
      const PndBounds& pa = problem.pnd[0][static_cast<std::size_t>(ia)];
      const PndBounds& pb = problem.pnd[1][static_cast<std::size_t>(ib)];
      if (pa.n_max() < cut.a || pb.n_max() < cut.b) {
        throw std::invalid_argument("decoy program: PND table shorter than the cut");
      }
      for (int na = 0; na <= cut.a; ++na) {
        for (int nb = 0; nb <= cut.b; ++nb) {
          const auto i = decoy_var(cut, na, nb);
          lower_coeff(i) = pa.lower[static_cast<std::size_t>(na)] * pb.lower[static_cast<std::size_t>(nb)];
          upper_coeff(i) = pa.upper[static_cast<std::size_t>(na)] * pb.upper[static_cast<std::size_t>(nb)];
        }
      }
      const BoundedObservable& q = row_source(problem.bounds.at(basis, ia, ib), which);
      // Coefficients sit anywhere between the envelopes; each row takes the
      // endpoint that weakens it.
      prog.add_constraint(lower_coeff, -kInf, q.upper);
      if (records) records->push_back({which, ia, ib, true, false, false, q.upper});
      const double lo = q.lower - truncation_slack(pa, pb, cut);
      if (lo > 0.0) prog.add_constraint(upper_coeff, lo, kInf);
      if (records) records->push_back({which, ia, ib, false, !(lo > 0.0), false, lo});
    }
  }
  return prog;
}

double error_rate_bound(double se11_upper, double s11_lower) {
  if (!(s11_lower > 0.0)) return se11_upper > 0.0 ? 0.5 : 0.0;
  return std::clamp(se11_upper / s11_lower, 0.0, 1.0);
}

DecoyBounds estimate_lp(const DecoyProblem& problem, double tol) {
  DecoyBounds out;
  out.method = DecoyMethod::lp;
  std::array<double, 3> value{};
  const std::array<DecoyProgram, 3> programs{DecoyProgram::s11_z, DecoyProgram::s11_x, DecoyProgram::se11_x};
  for (std::size_t k = 0; k < programs.size(); ++k) {
    std::vector<ConstraintRecord> recs;
    const auto prog = build_decoy_program(problem, programs[k], &recs);
    const auto res = lp::solve(prog, tol);
    if (res.status == lp::Status::infeasible) throw InconsistentObservables();
    if (res.status != lp::Status::optimal) {
      throw std::runtime_error(std::string("decoy LP ") + program_name(programs[k]) + ": " +
                               lp::to_string(res.status));
    }
    // Row indices of the LP skip vacuous records.
    Eigen::Index row = 0;
    for (auto& r : recs) {
      if (r.vacuous) continue;
      r.active = std::find(res.active_rows.begin(), res.active_rows.end(), row) != res.active_rows.end();
      ++row;
    }
    out.diagnostics.constraints.insert(out.diagnostics.constraints.end(), recs.begin(), recs.end());
    out.diagnostics.iterations[k] = res.iterations;
    out.diagnostics.dual_gap[k] = std::abs(res.optimum - res.dual_bound);
    value[k] = std::clamp(res.optimum, 0.0, 1.0);
  }
  out.s11_z_lower = value[0];
  out.s11_x_lower = value[1];
  out.se11_x_upper = value[2];
  out.e11_x_upper = error_rate_bound(out.se11_x_upper, out.s11_x_lower);
  const double p1a = problem.pnd[0][0].lower[1];
  const double p1b = problem.pnd[1][0].lower[1];
  out.q11_z_lower = p1a * p1b * out.s11_z_lower;
  return out;
}

namespace {

void require_distinct(const Intensities& in) {
  if (in.mu == in.nu || in.nu == in.omega || in.mu == in.omega) {
    throw std::domain_error("degenerate intensities");
  }
}

}  // namespace

double analytical_s11_lower(const IntervalSet& bounds, Basis basis, const Intensities& in) {
  require_distinct(in);
  const double mu = in.mu, nu = in.nu, w = in.omega;
  auto lo = [&](int a, int b) { return bounds.at(basis, a, b).gain.lower; };
  auto hi = [&](int a, int b) { return bounds.at(basis, a, b).gain.upper; };
  constexpr int M = 0, N = 1, W = 2;
  const double decoy_part = lo(N, N) * std::exp(2 * nu) + lo(W, W) * std::exp(2 * w) -
                            hi(N, W) * std::exp(nu + w) - hi(W, N) * std::exp(w + nu);
  const double signal_part = hi(M, M) * std::exp(2 * mu) + hi(W, W) * std::exp(2 * w) -
                             lo(M, W) * std::exp(mu + w) - lo(W, M) * std::exp(w + mu);
  const double num = (mu * mu - w * w) * (mu - w) * decoy_part - (nu * nu - w * w) * (nu - w) * signal_part;
  const double den = (mu - w) * (mu - w) * (nu - w) * (nu - w) * (mu - nu);
  return num / den;
}

double analytical_se11_upper(const IntervalSet& bounds, const Intensities& in) {
  require_distinct(in);
  const double nu = in.nu, w = in.omega;
  auto lo = [&](int a, int b) { return bounds.at(Basis::X, a, b).error_gain.lower; };
  auto hi = [&](int a, int b) { return bounds.at(Basis::X, a, b).error_gain.upper; };
  constexpr int N = 1, W = 2;
  const double num = std::exp(2 * nu) * hi(N, N) + std::exp(2 * w) * hi(W, W) -
                     std::exp(nu + w) * lo(N, W) - std::exp(w + nu) * lo(W, N);
  return num / ((nu - w) * (nu - w));
}

DecoyBounds estimate_analytical(const IntervalSet& bounds, const Intensities& in) {
  DecoyBounds out;
  out.method = DecoyMethod::analytical;
  out.s11_z_lower = std::clamp(analytical_s11_lower(bounds, Basis::Z, in), 0.0, 1.0);
  out.s11_x_lower = std::clamp(analytical_s11_lower(bounds, Basis::X, in), 0.0, 1.0);
  out.se11_x_upper = std::clamp(analytical_se11_upper(bounds, in), 0.0, 1.0);
  out.e11_x_upper = error_rate_bound(out.se11_x_upper, out.s11_x_lower);
  const double p1 = in.mu * std::exp(-in.mu);
  out.q11_z_lower = p1 * p1 * out.s11_z_lower;
  return out;
}

std::string decoy_report(const DecoyBounds& b) {
  std::ostringstream os;
  os.precision(10);
  os << "method " << (b.method == DecoyMethod::lp ? "lp" : "analytical") << '\n'
     << "s11_z_lower " << b.s11_z_lower << '\n'
     << "s11_x_lower " << b.s11_x_lower << '\n'
     << "se11_x_upper " << b.se11_x_upper << '\n'
     << "e11_x_upper " << b.e11_x_upper << '\n'
     << "q11_z_lower " << b.q11_z_lower << '\n';
  if (b.method == DecoyMethod::lp) {
    os << "iterations " << b.diagnostics.iterations[0] << ' ' << b.diagnostics.iterations[1] << ' '
       << b.diagnostics.iterations[2] << '\n';
    for (const auto& r : b.diagnostics.constraints) {
      os << program_name(r.program) << " pair " << r.ia << r.ib << (r.upper_row ? " upper " : " lower ")
         << "limit " << r.limit << (r.vacuous ? " vacuous" : r.active ? " active" : "") << '\n';
    }
  }
  return os.str();
}

}  // namespace mdiqkd
