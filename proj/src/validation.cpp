#include "mdiqkd/validation.hpp"

#include "mdiqkd/photon_stats.hpp"
#include "mdiqkd/pnd_bounds.hpp"
#include "mdiqkd/source_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace mdiqkd {

const char* to_string(SuiteStatus s) {
  switch (s) {
    case SuiteStatus::pass: return "PASS";
    case SuiteStatus::fail: return "FAIL";
    case SuiteStatus::insufficient_statistics: return "INSUFFICIENT STATISTICS";
  }
  return "?";
}

namespace {

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

void fold(SuiteResult& r) {
  r.status = SuiteStatus::pass;
  for (const auto& c : r.checks) {
    if (c.status == SuiteStatus::fail) {
      r.status = SuiteStatus::fail;
      return;
    }
    if (c.status == SuiteStatus::insufficient_statistics) r.status = SuiteStatus::insufficient_statistics;
  }
}

}  // namespace

// --- Hoeffding ----------------------------------------------------------------

HoeffdingCase run_hoeffding_case(HoeffdingCase c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto total = static_cast<std::int64_t>(std::llround(2.0 * c.k));
  std::binomial_distribution<std::int64_t> draw(total, c.beta);
  const double ratio = c.beta / (1.0 - c.beta);
  c.violations = 0;
  for (std::uint64_t t = 0; t < c.trials; ++t) {
    const auto ve = static_cast<double>(draw(rng));
    const double vs = static_cast<double>(total) - ve;
    if (ve <= ratio * (vs - 2.0 * c.epsilon * c.k)) ++c.violations;
  }
  c.frequency = static_cast<double>(c.violations) / static_cast<double>(c.trials);
  c.bound = c.general ? sampling_violation_bound_general(c.k, c.epsilon, c.beta)
                      : sampling_violation_bound(c.k, c.epsilon);
  return c;
}

SuiteResult hoeffding_suite(std::uint64_t seed, std::uint64_t trials) {
  SuiteResult r;
  r.name = "hoeffding";
  std::uint64_t stream = 0;
  auto add = [&](HoeffdingCase c) {
    c.trials = trials;
    c = run_hoeffding_case(c, seed + 7919 * ++stream);
    CheckLine line;
    line.label = std::string(c.general ? "general" : "balanced") + " k=" + fmt(c.k) + " eps=" + fmt(c.epsilon) +
                 " beta=" + fmt(c.beta);
    line.status = c.frequency <= c.bound ? SuiteStatus::pass : SuiteStatus::fail;
    line.detail = "frequency " + fmt(c.frequency) + " <= bound " + fmt(c.bound);
    r.checks.push_back(line);
  };
  for (double eps : {0.01, 0.02, 0.05}) add({1e4, eps, 0.5, false});
  for (double beta : {0.25, 0.5}) {
    for (double eps : {0.01, 0.02, 0.05}) add({1e4, eps, beta, true});
  }
  fold(r);
  return r;
}

// --- Channel oracle -------------------------------------------------------------

std::vector<OracleCheck> default_oracle_checks(const ExperimentParams& p) {
  std::vector<OracleCheck> v;
  auto add = [&](std::string label, Basis b, int ia, int ib, double L, ExperimentParams q) {
    OracleCheck c;
    c.label = std::move(label);
    c.params = q;
    c.basis = b;
    c.ia = ia;
    c.ib = ib;
    c.distance_km = L;
    v.push_back(c);
  };
  ExperimentParams half = p;
  half.intensities.mu = 0.5;
  add("Z mu-mu 100 km", Basis::Z, 0, 0, 100.0, half);
  add("Z mu-mu 50 km", Basis::Z, 0, 0, 50.0, half);
  add("Z mu-nu 0 km", Basis::Z, 0, 1, 0.0, half);
  add("X mu-mu 50 km", Basis::X, 0, 0, 50.0, half);
  ExperimentParams noisy = half;
  noisy.y0 = 1e-2;
  add("Z vacuum, y0=1e-2", Basis::Z, 2, 2, 0.0, noisy);
  return v;
}

void run_oracle_check(OracleCheck& c, std::uint64_t samples, std::uint64_t seed, int jobs) {
  const auto g = c.params.intensities.as_array();
  const double ga = g[static_cast<std::size_t>(c.ia)];
  const double gb = g[static_cast<std::size_t>(c.ib)];
  c.analytic = expected_observables(c.params, c.distance_km).observables.at(c.basis, c.ia, c.ib);
  const double expected_events = c.analytic.gain * static_cast<double>(samples);
  if (samples < 10000 || expected_events < 100.0) {
    c.status = SuiteStatus::insufficient_statistics;
    c.estimate = {};
    c.estimate.samples = samples;
    return;
  }
  c.estimate = basis_oracle(c.params, c.basis, ga, gb, c.distance_km, samples, seed, jobs);
  const double n = static_cast<double>(samples);
  const double se_gain = std::sqrt(c.analytic.gain * (1.0 - c.analytic.gain) / n);
  c.gain_z = (c.estimate.gain - c.analytic.gain) / se_gain;
  const double e = c.analytic.qber;
  const double events = std::max<double>(1.0, static_cast<double>(c.estimate.events));
  const double se_qber = std::sqrt(std::max(e * (1.0 - e), 1.0 / events) / events);
  c.qber_z = (c.estimate.qber - e) / se_qber;
  c.status = std::abs(c.gain_z) <= 3.0 && std::abs(c.qber_z) <= 3.0 ? SuiteStatus::pass : SuiteStatus::fail;
}

SuiteResult channel_oracle_suite(const ExperimentParams& p, std::uint64_t samples, std::uint64_t seed, int jobs,
                                 std::vector<OracleCheck>* out) {
  SuiteResult r;
  r.name = "channel oracle";
  auto checks = default_oracle_checks(p);
  std::uint64_t k = 0;
  for (auto& c : checks) {
    run_oracle_check(c, samples, seed + 104729 * ++k, jobs);
    CheckLine line;
    line.label = c.label;
    line.status = c.status;
    if (c.status == SuiteStatus::insufficient_statistics) {
      line.detail = "expected events " + fmt(c.analytic.gain * static_cast<double>(samples)) + " < 100 or samples < 1e4";
    } else {
      line.detail = "gain " + fmt(c.estimate.gain) + " vs " + fmt(c.analytic.gain) + " (" + fmt(c.gain_z, 3) +
                    " se), qber " + fmt(c.estimate.qber) + " vs " + fmt(c.analytic.qber) + " (" + fmt(c.qber_z, 3) +
                    " se)";
    }
    r.checks.push_back(line);
  }
  fold(r);
  if (out) *out = checks;
  return r;
}

void write_oracle_csv(std::ostream& os, const std::vector<OracleCheck>& checks) {
  os << "label,basis,ia,ib,distance_km,samples,events,errors,gain,gain_stderr,qber,qber_stderr,"
        "analytic_gain,analytic_qber,status\n";
  os << std::scientific << std::setprecision(9);
  for (const auto& c : checks) {
    os << '"' << c.label << "\"," << (c.basis == Basis::Z ? 'Z' : 'X') << ',' << c.ia << ',' << c.ib << ','
       << c.distance_km << ',' << c.estimate.samples << ',' << c.estimate.events << ',' << c.estimate.errors << ','
       << c.estimate.gain << ',' << c.estimate.gain_stderr << ',' << c.estimate.qber << ','
       << c.estimate.qber_stderr << ',' << c.analytic.gain << ',' << c.analytic.qber << ','
       << to_string(c.status) << '\n';
  }
  os << std::defaultfloat;
}

// --- LP fixtures ------------------------------------------------------------------

lp::LinearProgram<double> random_lp_fixture(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.05, 1.0);
  std::bernoulli_distribution coin(0.5);
  lp::LinearProgram<double> prog(n);
  prog.sense = coin(rng) ? lp::Sense::minimize : lp::Sense::maximize;
  Eigen::VectorXd x0(n);
  for (int j = 0; j < n; ++j) {
    prog.objective(j) = u(rng);
    prog.var_lo(j) = -pos(rng);
    prog.var_hi(j) = pos(rng);
    x0(j) = prog.var_lo(j) + (prog.var_hi(j) - prog.var_lo(j)) * 0.5 * (1.0 + u(rng)) * 0.9;
  }
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd a(n);
    for (int j = 0; j < n; ++j) a(j) = u(rng);
    const double act = a.dot(x0);
    const int kind = static_cast<int>(rng() % 3);  // 0: <=, 1: >=, 2: two-sided
    const double lo = kind == 0 ? -inf : act - 0.5 * pos(rng);
    const double hi = kind == 1 ? inf : act + 0.5 * pos(rng);
    prog.add_constraint(a, lo, hi);
  }
  return prog;
}

namespace {

struct Plane {
  int row;  ///< -1 for a variable bound
  int var;
  double value;
};

}  // namespace

std::optional<double> vertex_enumeration_optimum(const lp::LinearProgram<double>& prog, double feas_tol) {
  const int n = static_cast<int>(prog.num_vars());
  const int m = static_cast<int>(prog.num_rows());
  // Active rows with their side: each row is inactive, at lo, or at hi.
  std::optional<double> best;
  const double sign = prog.sense == lp::Sense::minimize ? 1.0 : -1.0;
  std::vector<int> row_side(static_cast<std::size_t>(m), 0);
  std::vector<int> var_state(static_cast<std::size_t>(n), 0);  // 0 lo, 1 hi, 2 free

  auto check_point = [&](const Eigen::VectorXd& x) {
    for (int j = 0; j < n; ++j) {
      if (x(j) < prog.var_lo(j) - feas_tol || x(j) > prog.var_hi(j) + feas_tol) return;
    }
    const Eigen::VectorXd act = prog.rows * x;
    for (int i = 0; i < m; ++i) {
      if (act(i) < prog.row_lo(i) - feas_tol || act(i) > prog.row_hi(i) + feas_tol) return;
    }
    const double obj = sign * prog.objective.dot(x);
    if (!best || obj < *best) best = obj;
  };

  // Recursion over rows, then over variables, keeping #free == #active rows.
  std::vector<int> active;
  std::vector<double> active_rhs;
  std::function<void(int, int)> vars_rec;
  Eigen::VectorXd x(n);
  std::vector<int> free_vars;
  vars_rec = [&](int j, int free_left) {
    if (n - j < free_left) return;
    if (j == n) {
      const int k = static_cast<int>(active.size());
      for (int v = 0; v < n; ++v) {
        if (var_state[static_cast<std::size_t>(v)] == 0) x(v) = prog.var_lo(v);
        if (var_state[static_cast<std::size_t>(v)] == 1) x(v) = prog.var_hi(v);
      }
      if (k > 0) {
        Eigen::MatrixXd A(k, k);
        Eigen::VectorXd b(k);
        for (int r = 0; r < k; ++r) {
          double rhs = active_rhs[static_cast<std::size_t>(r)];
          for (int v = 0; v < n; ++v) {
            if (var_state[static_cast<std::size_t>(v)] != 2) rhs -= prog.rows(active[static_cast<std::size_t>(r)], v) * x(v);
          }
          b(r) = rhs;
          for (int c = 0; c < k; ++c) A(r, c) = prog.rows(active[static_cast<std::size_t>(r)], free_vars[static_cast<std::size_t>(c)]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible()) return;
        const Eigen::VectorXd sol = lu.solve(b);
        for (int c = 0; c < k; ++c) x(free_vars[static_cast<std::size_t>(c)]) = sol(c);
      }
      check_point(x);
      return;
    }
    for (int s = 0; s < 3; ++s) {
      if (s == 2 && free_left == 0) continue;
      var_state[static_cast<std::size_t>(j)] = s;
      if (s == 2) free_vars.push_back(j);
      vars_rec(j + 1, s == 2 ? free_left - 1 : free_left);
      if (s == 2) free_vars.pop_back();
    }
  };
  std::function<void(int)> rows_rec = [&](int i) {
    if (static_cast<int>(active.size()) > n) return;
    if (i == m) {
      vars_rec(0, static_cast<int>(active.size()));
      return;
    }
    rows_rec(i + 1);
    for (double lim : {prog.row_lo(i), prog.row_hi(i)}) {
      if (!std::isfinite(lim)) continue;
      active.push_back(i);
      active_rhs.push_back(lim);
      rows_rec(i + 1);
      active.pop_back();
      active_rhs.pop_back();
    }
  };
  rows_rec(0);
  if (!best) return std::nullopt;
  return sign * *best;
}

SuiteResult lp_enumeration_suite(std::uint64_t seed, int fixtures, double tol) {
  SuiteResult r;
  r.name = "lp vs vertex enumeration";
  for (int f = 0; f < fixtures; ++f) {
    const int n = 2 + f % 9;
    const int m = 1 + (f * 7) % 4;
    const auto prog = random_lp_fixture(n, m, seed + 31 * static_cast<std::uint64_t>(f));
    const auto res = lp::solve(prog);
    const auto ref = vertex_enumeration_optimum(prog);
    CheckLine line;
    line.label = "fixture " + std::to_string(f) + " (" + std::to_string(n) + " vars, " + std::to_string(m) + " rows)";
    if (!ref) {
      line.status = res.status == lp::Status::infeasible ? SuiteStatus::pass : SuiteStatus::fail;
      line.detail = std::string("no feasible vertex, solver ") + lp::to_string(res.status);
    } else if (res.status != lp::Status::optimal) {
      line.status = SuiteStatus::fail;
      line.detail = std::string("solver ") + lp::to_string(res.status);
    } else {
      const double diff = std::abs(res.optimum - *ref);
      line.status = diff <= tol ? SuiteStatus::pass : SuiteStatus::fail;
      line.detail = "simplex " + fmt(res.optimum, 12) + " enumeration " + fmt(*ref, 12) + " |diff| " + fmt(diff, 3);
    }
    r.checks.push_back(line);
  }
  fold(r);
  return r;
}

// --- Poisson limit ----------------------------------------------------------------

SuiteResult poisson_limit_suite() {
  SuiteResult r;
  r.name = "poisson limit";
  const double big = poisson_limit_distance(1000000, 1e-7);
  r.checks.push_back({"distance(m=1e6, p=1e-7) < 1e-6", big < 1e-6 ? SuiteStatus::pass : SuiteStatus::fail,
                      "value " + fmt(big)});
  const double small = poisson_limit_distance(10, 0.5);
  r.checks.push_back({"distance(m=10, p=0.5) > 0.01", small > 0.01 ? SuiteStatus::pass : SuiteStatus::fail,
                      "value " + fmt(small)});
  // Envelope brackets every binomial in a small window.
  const auto env = pnd_bounds(1000.0, 0.05, 2e-4, 6);
  bool ok = true;
  for (std::int64_t m = env.window_lo; m <= env.window_hi; ++m) {
    for (int n = 0; n <= env.n_max(); ++n) {
      const double v = binomial_pmf(n, m, env.effective_p);
      ok = ok && env.lower[static_cast<std::size_t>(n)] <= v * (1 + 1e-12) &&
           v <= env.upper[static_cast<std::size_t>(n)] * (1 + 1e-12);
    }
  }
  r.checks.push_back({"envelope brackets Binom(m, p) over the window (M=1e3)",
                      ok ? SuiteStatus::pass : SuiteStatus::fail, ""});
  fold(r);
  return r;
}

// --- Driver -----------------------------------------------------------------------

std::vector<SuiteResult> run_validation(const ExperimentParams& p, const ValidationOptions& opt,
                                        std::vector<OracleCheck>* oracle_rows) {
  std::vector<SuiteResult> out;
  out.push_back(hoeffding_suite(opt.seed));
  out.push_back(channel_oracle_suite(p, opt.samples, opt.seed, opt.jobs, oracle_rows));
  out.push_back(lp_enumeration_suite(opt.seed));
  out.push_back(poisson_limit_suite());
  return out;
}

void print_report(std::ostream& os, const std::vector<SuiteResult>& results) {
  for (const auto& s : results) {
    os << "== " << s.name << ": " << to_string(s.status) << '\n';
    for (const auto& c : s.checks) {
      os << "  [" << to_string(c.status) << "] " << c.label;
      if (!c.detail.empty()) os << " : " << c.detail;
      os << '\n';
    }
  }
  os << (all_passed(results) ? "ALL SUITES PASSED" : "VALIDATION FAILED") << '\n';
}

bool all_passed(const std::vector<SuiteResult>& results) {
  return std::none_of(results.begin(), results.end(),
                      [](const SuiteResult& s) { return s.status == SuiteStatus::fail; });
}

}  // namespace mdiqkd
