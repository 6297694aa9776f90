#include "mdiqkd/params.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <vector>

namespace mdiqkd {

namespace {

struct Field {
  const char* name;
  std::function<double&(ExperimentParams&)> real;
  std::function<int&(ExperimentParams&)> integer;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"eta_d", [](ExperimentParams& p) -> double& { return p.eta_d; }, nullptr},
      {"y0", [](ExperimentParams& p) -> double& { return p.y0; }, nullptr},
      {"e_d", [](ExperimentParams& p) -> double& { return p.e_d; }, nullptr},
      {"rep_rate", [](ExperimentParams& p) -> double& { return p.rep_rate; }, nullptr},
      {"alpha_db_per_km", [](ExperimentParams& p) -> double& { return p.alpha_db_per_km; },
       nullptr},
      {"eta_id", [](ExperimentParams& p) -> double& { return p.eta_id; }, nullptr},
      {"sigma_id", [](ExperimentParams& p) -> double& { return p.sigma_id; }, nullptr},
      {"q", [](ExperimentParams& p) -> double& { return p.q; }, nullptr},
      {"k_pulses", [](ExperimentParams& p) -> double& { return p.k_pulses; }, nullptr},
      {"epsilon_sec", [](ExperimentParams& p) -> double& { return p.epsilon_sec; }, nullptr},
      {"m_c", [](ExperimentParams& p) -> double& { return p.m_c; }, nullptr},
      {"delta", [](ExperimentParams& p) -> double& { return p.delta; }, nullptr},
      {"varsigma", [](ExperimentParams& p) -> double& { return p.varsigma; }, nullptr},
      {"f_e", [](ExperimentParams& p) -> double& { return p.f_e; }, nullptr},
      {"mu", [](ExperimentParams& p) -> double& { return p.intensities.mu; }, nullptr},
      {"nu", [](ExperimentParams& p) -> double& { return p.intensities.nu; }, nullptr},
      {"omega", [](ExperimentParams& p) -> double& { return p.intensities.omega; }, nullptr},
      {"tau_conf", [](ExperimentParams& p) -> double& { return p.tau_conf; }, nullptr},
      {"a_cut", nullptr, [](ExperimentParams& p) -> int& { return p.cut.a; }},
      {"b_cut", nullptr, [](ExperimentParams& p) -> int& { return p.cut.b; }},
      {"fk_constraints", nullptr, [](ExperimentParams& p) -> int& { return p.fk_constraints; }},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void require(bool ok, const std::string& invariant) {
  if (!ok) throw ConfigError("validation failed: " + invariant);
}

}  // namespace

void validate(const ExperimentParams& p) {
  require(p.eta_d > 0.0 && p.eta_d <= 1.0, "0 < eta_d <= 1");
  require(p.eta_id > 0.0 && p.eta_id <= 1.0, "0 < eta_id <= 1");
  require(p.q > 0.0 && p.q < 1.0, "0 < q < 1");
  require(p.e_d >= 0.0 && p.e_d < 0.5, "0 <= e_d < 0.5");
  require(p.y0 >= 0.0 && p.y0 < 1.0, "0 <= y0 < 1");
  require(p.alpha_db_per_km >= 0.0, "alpha_db_per_km >= 0");
  require(p.sigma_id >= 0.0, "sigma_id >= 0");
  require(p.varsigma >= 0.0, "varsigma >= 0");
  require(p.m_c > 0.0, "m_c > 0");
  require(p.k_pulses >= 1.0, "k_pulses >= 1");
  require(p.epsilon_sec > 0.0 && p.epsilon_sec < 1.0, "0 < epsilon_sec < 1");
  const auto& in = p.intensities;
  require(in.omega >= 0.0 && in.omega < in.nu && in.nu < in.mu,
          "decoy ordering: 0 <= omega < nu < mu");
  require(p.delta > 0.0 && p.delta < 1.0, "delta in (0,1)");
  require(p.f_e >= 1.0, "f_e >= 1");
  require(p.tau_conf > 0.0 && p.tau_conf < 1.0, "tau_conf in (0,1)");
  require(p.cut.a >= 2 && p.cut.b >= 2, "a_cut >= 2 and b_cut >= 2");
  require(p.fk_constraints >= 1, "fk_constraints >= 1");
  // Checked at zero distance, where M is largest: it covers every distance
  // because the condition only involves (1+delta) * gamma.
  require((1.0 + p.delta) * in.mu < 1.0,
          "untagged weak-output condition (1+delta) M lambda q < 1");
}

ExperimentParams parse_config(const std::string& text) {
  ExperimentParams p;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("parse error at line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "sigma_id_unit") {
      if (value == "variance") p.sigma_id_is_variance = true;
      else if (value == "stddev") p.sigma_id_is_variance = false;
      else throw ConfigError("parse error at line " + std::to_string(line_no) +
                             ": sigma_id_unit must be variance or stddev");
      continue;
    }
    const Field* field = nullptr;
    for (const auto& f : fields()) {
      if (key == f.name) field = &f;
    }
    if (field == nullptr) {
      throw ConfigError("parse error at line " + std::to_string(line_no) + ": unknown key '" +
                        key + "'");
    }
    std::size_t used = 0;
    try {
      if (field->real) {
        field->real(p) = std::stod(value, &used);
      } else {
        field->integer(p) = std::stoi(value, &used);
      }
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw ConfigError("parse error at line " + std::to_string(line_no) + ": bad value for '" +
                        key + "'");
    }
  }
  validate(p);
  return p;
}

ExperimentParams load_config(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_config(buffer.str());
}

std::string to_config_string(const ExperimentParams& p) {
  ExperimentParams copy = p;
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& f : fields()) {
    out << f.name << " = ";
    if (f.real) {
      out << f.real(copy);
    } else {
      out << f.integer(copy);
    }
    out << '\n';
  }
  out << "sigma_id_unit = " << (p.sigma_id_is_variance ? "variance" : "stddev") << '\n';
  return out.str();
}

double side_transmittance(const ExperimentParams& p, double distance_km) {
  return std::pow(10.0, -p.alpha_db_per_km * (0.5 * distance_km) / 10.0);
}

SideParams derive_side_params(const ExperimentParams& p, double distance_km) {
  if (!(distance_km >= 0.0)) throw std::domain_error("derive_side_params: distance must be >= 0");
  SideParams side;
  side.distance_km = distance_km;
  side.channel_transmittance = side_transmittance(p, distance_km);
  // 50:50 split at the relay, then the outbound half of the link.
  side.m_mean = 0.5 * p.m_c * side.channel_transmittance;
  side.m_measured = side.m_mean * p.eta_id * (1.0 - p.q);
  side.encoding_tap = p.q;
  const auto gammas = p.intensities.as_array();
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    side.lambda[i] = gammas[i] / (side.m_mean * p.q);
    if ((1.0 + p.delta) * side.m_mean * side.lambda[i] * p.q >= 1.0) {
      throw std::domain_error("untagged weak-output condition violated");
    }
    if (side.lambda[i] > 1.0) {
      throw std::domain_error("internal transmittance exceeds 1: source too weak for intensity");
    }
  }
  return side;
}

}  // namespace mdiqkd
