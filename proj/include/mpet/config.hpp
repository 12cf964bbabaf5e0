#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "mpet/model.hpp"
#include "mpet/verify.hpp"

namespace mpet {

/// Minimal TOML subset: [table] headers, key = value lines, #-comments.
/// Values: booleans, integers, floats, double-quoted strings, and
/// (possibly nested) homogeneous arrays. Keys are flattened to
/// "table.key". Covers the parameter and sweep file schemas.
struct ConfigValue {
  std::variant<bool, long long, double, std::string, std::vector<ConfigValue>> v;

  bool is_array() const { return std::holds_alternative<std::vector<ConfigValue>>(v); }
  bool as_bool() const;
  long long as_int() const;
  double as_double() const;  // integers promote
  const std::string& as_string() const;
  const std::vector<ConfigValue>& as_array() const;
  std::vector<double> as_double_vector() const;
  std::vector<long long> as_int_vector() const;
};

using ConfigTable = std::map<std::string, ConfigValue>;

ConfigTable parse_config(const std::string& text);
ConfigTable parse_config_file(const std::string& path);

/// Parameter file: `n` plus optional overrides of every MpetParameters
/// field. Per-network keys accept a scalar (broadcast) or an n-vector;
/// `beta` is the uniform off-diagonal transfer and `beta_pairs` a list of
/// [i, j, value] triples (1-based networks).
MpetParameters load_parameters(const ConfigTable& table);
MpetParameters load_parameters_file(const std::string& path);

/// Sweep file: grid axes under [grid] (mu, lambda, K, c_p, beta, tau, n,
/// mesh), scalar knobs under [sweep] (nx, eta, tol, max_iter, seed, jobs,
/// dense_cap, spectrum, minres).
SweepConfig load_sweep_config(const ConfigTable& table);
SweepConfig load_sweep_config_file(const std::string& path);

}  // namespace mpet
