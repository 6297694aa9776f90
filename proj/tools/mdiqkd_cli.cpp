// Front end: rate-versus-distance sweeps and the validation suites.

#include "mdiqkd/keyrate.hpp"
#include "mdiqkd/params.hpp"
#include "mdiqkd/validation.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace mdiqkd;

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;
constexpr int kSuiteFailure = 3;

/// What produced a file, written as "# key: value" lines ahead of the data.
struct RunManifest {
  std::string config_path;
  std::string command;
  std::string distances;
  std::string mode;
  std::string output_path;
  std::string seed;
  std::string tool_version = MDIQKD_VERSION;
  std::string resolved_config;

  void write(std::ostream& os) const {
    os << "# tool_version: " << tool_version << '\n'
       << "# command: " << command << '\n'
       << "# config: " << (config_path.empty() ? "(built-in defaults)" : config_path) << '\n'
       << "# distances: " << distances << '\n'
       << "# mode: " << mode << '\n'
       << "# output: " << (output_path.empty() ? "-" : output_path) << '\n'
       << "# seed: " << seed << '\n';
    std::istringstream lines(resolved_config);
    for (std::string line; std::getline(lines, line);) {
      if (!line.empty()) os << "# param: " << line << '\n';
    }
  }
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// START:STOP:STEP, both ends inclusive.
std::vector<double> parse_distances(const std::string& spec) {
  std::vector<double> parts;
  std::istringstream is(spec);
  for (std::string tok; std::getline(is, tok, ':');) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("--distances: cannot parse '" + tok + "'");
    }
  }
  if (parts.size() != 3) throw UsageError("--distances expects START:STOP:STEP");
  const double start = parts[0], stop = parts[1], step = parts[2];
  if (!(step > 0.0) || stop < start || start < 0.0) {
    throw UsageError("--distances needs 0 <= START <= STOP and STEP > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = start + static_cast<double>(i) * step;
  return out;
}

ExperimentParams resolve_params(const std::string& config_path, double mc_override) {
  ExperimentParams p = config_path.empty() ? ExperimentParams{} : load_config(config_path);
  if (mc_override > 0.0) p.m_c = mc_override;
  validate(p);
  return p;
}

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) s += ' ';
    s += argv[i];
  }
  return s;
}

void write_sweep_csv(std::ostream& os, const RunManifest& manifest, const std::vector<KeyRatePoint>& points) {
  manifest.write(os);
  os << "distance_km,mu_opt,rate_untrusted,rate_trusted,q11_lower,e11_upper,delta_frac,epsilon_sample\n";
  os << std::scientific << std::setprecision(9);
  for (const auto& pt : points) {
    os << pt.distance_km << ',' << pt.mu_opt << ',' << pt.rate_untrusted << ',' << pt.rate_trusted << ','
       << pt.q11_lower << ',' << pt.e11_upper << ',' << pt.delta_frac << ',' << pt.epsilon_sample << '\n';
  }
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MDI-QKD key-rate sweeps and oracle checks"};
  app.require_subcommand(1);

  std::string config_path, out_path, mode_name = "asymptotic", distance_spec = "0:220:10",
                                     estimator_name = "lp";
  double mc = 0.0;
  bool with_baseline = false;
  int jobs = 1;

  auto* sweep_cmd = app.add_subcommand("sweep", "Optimised key rate over a distance grid, as CSV");
  sweep_cmd->add_option("--config", config_path, "Parameter file (key = value)");
  sweep_cmd->add_option("--mode", mode_name, "asymptotic or finite")->check(CLI::IsMember({"asymptotic", "finite"}));
  sweep_cmd->add_option("--distances", distance_spec, "START:STOP:STEP in km, inclusive");
  sweep_cmd->add_option("--mc", mc, "Override the source photon number M_c");
  sweep_cmd->add_option("--out", out_path, "CSV path (stdout when omitted)");
  sweep_cmd->add_flag("--trusted-baseline", with_baseline, "Also compute the trusted-source column");
  sweep_cmd->add_option("--estimator", estimator_name, "Decoy estimator: lp or analytical")
      ->check(CLI::IsMember({"lp", "analytical"}));
  sweep_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::uint64_t seed = ValidationOptions{}.seed;
  double samples = static_cast<double>(ValidationOptions{}.samples);
  std::string fixtures_path;
  auto* validate_cmd = app.add_subcommand("validate", "Run the oracle suites and print a pass/fail table");
  validate_cmd->add_option("--config", config_path, "Parameter file for the channel oracle");
  validate_cmd->add_option("--seed", seed, "Base RNG seed");
  validate_cmd->add_option("--samples", samples, "Monte Carlo samples per oracle setting")
      ->check(CLI::NonNegativeNumber);
  validate_cmd->add_option("--jobs", jobs, "Worker threads for the oracle")->check(CLI::PositiveNumber);
  validate_cmd->add_option("--fixtures", fixtures_path, "Write the oracle results as a CSV fixture");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  RunManifest manifest;
  manifest.config_path = config_path;
  manifest.command = join_args(argc, argv);

  if (*sweep_cmd) {
    return guarded([&] {
      const ExperimentParams p = resolve_params(config_path, mc);
      const std::vector<double> distances = parse_distances(distance_spec);
      SweepOptions opt;
      opt.mode = parse_mode(mode_name);
      opt.trusted_baseline = with_baseline;
      opt.estimator = estimator_name == "lp" ? DecoyMethod::lp : DecoyMethod::analytical;
      opt.jobs = jobs;
      manifest.distances = distance_spec;
      manifest.mode = mode_name;
      manifest.output_path = out_path;
      manifest.seed = "none (deterministic)";
      manifest.resolved_config = to_config_string(p);
      const auto points = sweep(p, distances, opt);
      if (out_path.empty()) {
        write_sweep_csv(std::cout, manifest, points);
      } else {
        std::ofstream os(out_path);
        if (!os) throw std::runtime_error("cannot open " + out_path);
        write_sweep_csv(os, manifest, points);
      }
      return 0;
    });
  }

  return guarded([&] {
    const ExperimentParams p = resolve_params(config_path, 0.0);
    ValidationOptions opt;
    opt.seed = seed;
    opt.samples = static_cast<std::uint64_t>(samples);
    opt.jobs = jobs;
    manifest.distances = "oracle settings";
    manifest.mode = "validate";
    manifest.output_path = fixtures_path;
    manifest.seed = std::to_string(seed);
    manifest.resolved_config = to_config_string(p);
    std::vector<OracleCheck> rows;
    const auto results = run_validation(p, opt, &rows);
    manifest.write(std::cout);
    print_report(std::cout, results);
    if (!fixtures_path.empty()) {
      std::ofstream os(fixtures_path);
      if (!os) throw std::runtime_error("cannot open " + fixtures_path);
      manifest.write(os);
      write_oracle_csv(os, rows);
    }
    return all_passed(results) ? 0 : kSuiteFailure;
  });
}
