#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fosf {

// Physical and design parameters of the boundary-controlled hyperbolic plant
// and of the controller/observer delay dynamics.
struct SystemParams {
  double alpha;    // plant coefficient, > 0
  double beta;     // plant coefficient, > 0
  double gamma;    // boundary-integrator coupling, != 0
  double mu_c;     // controller design, in (0, 1]
  double kappa_c;  // controller design, > 0
  double mu_o;     // observer design, in (0, 1]
  double kappa_o;  // observer design, > 0
};

struct DerivedParams {
  double tau;       // wave travel time, (alpha*beta)^{-1/2}
  double rho;       // observer boundary-injection coefficient
  double k_ring;    // unbounded feedback coefficient
  double varkappa;  // feedforward scale; stored for completeness, unused at runtime
};

// Carries the full list of violations, not just the first one.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

DerivedParams derive(const SystemParams& p);

// Validates a flat key-value map with keys "plant.alpha", ..., "design.kappa_o".
// Throws ConfigError listing every missing/unknown/out-of-range entry.
SystemParams validate_config(const std::map<std::string, double>& raw);

// Minimal TOML subset: [table] headers, key = value lines where value is a
// float or a double-quoted string, and '#' comments.
struct ParsedConfig {
  std::map<std::string, double> numbers;
  std::map<std::string, std::string> strings;
};
ParsedConfig parse_config_text(const std::string& text);
ParsedConfig load_config_file(const std::string& path);

// Full run configuration: plant/design numbers plus the gain-synthesis switches.
struct RunConfig {
  SystemParams sys;
  std::string gain_method = "pole-placement";  // "pole-placement" | "paper"
  std::optional<double> theta_minus;           // default -2*tau when unset
};
RunConfig make_run_config(const ParsedConfig& parsed);

}  // namespace fosf
