#include "fosf/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fosf {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "; ";
    out += parts[i];
  }
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error("invalid configuration: " + join(violations)),
      violations_(std::move(violations)) {}

DerivedParams derive(const SystemParams& p) {
  std::vector<std::string> bad;
  if (p.alpha * p.beta <= 0.0) bad.push_back("alpha*beta must be positive");
  if (p.mu_c <= 0.0) bad.push_back("mu_c must be positive");
  if (p.mu_o <= 0.0) bad.push_back("mu_o must be positive");
  if (!bad.empty()) throw ConfigError(bad);

  DerivedParams d;
  d.tau = 1.0 / std::sqrt(p.alpha * p.beta);
  d.rho = p.beta * d.tau * (p.mu_o - 1.0) / (p.mu_o + 1.0);
  d.k_ring = p.beta * d.tau * (p.mu_c - 1.0) / (p.mu_c + 1.0);
  d.varkappa = 1.0;
  if (d.rho == p.beta * d.tau) throw ConfigError({"rho == beta*tau is degenerate"});
  return d;
}

SystemParams validate_config(const std::map<std::string, double>& raw) {
  static const char* kKeys[7] = {"plant.alpha",    "plant.beta",     "plant.gamma",
                                 "design.mu_c",    "design.kappa_c", "design.mu_o",
                                 "design.kappa_o"};
  std::vector<std::string> bad;
  for (const auto& [key, value] : raw) {
    bool known = false;
    for (const char* k : kKeys) known = known || key == k;
    if (!known) bad.push_back("unknown key '" + key + "'");
  }
  auto get = [&](const std::string& key, double& dst) {
    auto it = raw.find(key);
    if (it == raw.end()) {
      bad.push_back("missing key '" + key + "'");
      return false;
    }
    dst = it->second;
    return true;
  };

  SystemParams p{};
  bool have_alpha = get("plant.alpha", p.alpha);
  bool have_beta = get("plant.beta", p.beta);
  bool have_gamma = get("plant.gamma", p.gamma);
  bool have_mu_c = get("design.mu_c", p.mu_c);
  bool have_kappa_c = get("design.kappa_c", p.kappa_c);
  bool have_mu_o = get("design.mu_o", p.mu_o);
  bool have_kappa_o = get("design.kappa_o", p.kappa_o);

  if (have_alpha && !(p.alpha > 0.0)) bad.push_back("plant.alpha must be > 0");
  if (have_beta && !(p.beta > 0.0)) bad.push_back("plant.beta must be > 0");
  if (have_gamma && p.gamma == 0.0) bad.push_back("plant.gamma must be nonzero");
  if (have_mu_c && !(p.mu_c > 0.0 && p.mu_c <= 1.0))
    bad.push_back("design.mu_c must be in (0, 1]");
  if (have_mu_o && !(p.mu_o > 0.0 && p.mu_o <= 1.0))
    bad.push_back("design.mu_o must be in (0, 1]");
  if (have_kappa_c && !(p.kappa_c > 0.0)) bad.push_back("design.kappa_c must be > 0");
  if (have_kappa_o && !(p.kappa_o > 0.0)) bad.push_back("design.kappa_o must be > 0");

  if (!bad.empty()) throw ConfigError(bad);
  return p;
}

ParsedConfig parse_config_text(const std::string& text) {
  ParsedConfig out;
  std::istringstream in(text);
  std::string line, table;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError({"line " + std::to_string(lineno) + ": malformed table header"});
      table = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError({"line " + std::to_string(lineno) + ": expected key = value"});
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError({"line " + std::to_string(lineno) + ": empty key or value"});
    std::string full = table.empty() ? key : table + "." + key;
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"')
        throw ConfigError({"line " + std::to_string(lineno) + ": unterminated string"});
      out.strings[full] = value.substr(1, value.size() - 2);
    } else {
      try {
        size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        out.numbers[full] = v;
      } catch (const std::exception&) {
        throw ConfigError(
            {"line " + std::to_string(lineno) + ": cannot parse number '" + value + "'"});
      }
    }
  }
  return out;
}

ParsedConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

RunConfig make_run_config(const ParsedConfig& parsed) {
  RunConfig cfg;
  std::map<std::string, double> plant_design;
  for (const auto& [key, value] : parsed.numbers) {
    if (key == "gains.theta_minus") {
      cfg.theta_minus = value;
      continue;
    }
    plant_design[key] = value;
  }
  for (const auto& [key, value] : parsed.strings) {
    if (key == "gains.method") {
      if (value != "pole-placement" && value != "paper")
        throw ConfigError({"gains.method must be \"pole-placement\" or \"paper\""});
      cfg.gain_method = value;
    } else {
      throw ConfigError({"unknown string key '" + key + "'"});
    }
  }
  cfg.sys = validate_config(plant_design);
  return cfg;
}

}  // namespace fosf
