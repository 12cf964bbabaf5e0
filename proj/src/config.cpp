#include "mpet/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mpet {

bool ConfigValue::as_bool() const {
  if (auto* b = std::get_if<bool>(&v)) return *b;
  throw std::runtime_error("config: expected a boolean");
}

long long ConfigValue::as_int() const {
  if (auto* i = std::get_if<long long>(&v)) return *i;
  throw std::runtime_error("config: expected an integer");
}

double ConfigValue::as_double() const {
  if (auto* d = std::get_if<double>(&v)) return *d;
  if (auto* i = std::get_if<long long>(&v)) return static_cast<double>(*i);
  throw std::runtime_error("config: expected a number");
}

const std::string& ConfigValue::as_string() const {
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  throw std::runtime_error("config: expected a string");
}

const std::vector<ConfigValue>& ConfigValue::as_array() const {
  if (auto* a = std::get_if<std::vector<ConfigValue>>(&v)) return *a;
  throw std::runtime_error("config: expected an array");
}

std::vector<double> ConfigValue::as_double_vector() const {
  std::vector<double> out;
  for (const auto& e : as_array()) out.push_back(e.as_double());
  return out;
}

std::vector<long long> ConfigValue::as_int_vector() const {
  std::vector<long long> out;
  for (const auto& e : as_array()) out.push_back(e.as_int());
  return out;
}

namespace {

struct Cursor {
  const std::string& s;
  std::size_t i = 0;
  int line = 1;

  bool done() const { return i >= s.size(); }
  char peek() const { return s[i]; }
  void advance() {
    if (s[i] == '\n') ++line;
    ++i;
  }
  void skip_ws_inline() {
    while (!done() && (peek() == ' ' || peek() == '\t')) advance();
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("config parse error (line " + std::to_string(line) + "): " + what);
  }
};

void skip_ws_and_comments(Cursor& c) {
  while (!c.done()) {
    char ch = c.peek();
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      c.advance();
    } else if (ch == '#') {
      while (!c.done() && c.peek() != '\n') c.advance();
    } else {
      break;
    }
  }
}

ConfigValue parse_value(Cursor& c);

ConfigValue parse_array(Cursor& c) {
  c.advance();  // '['
  std::vector<ConfigValue> items;
  skip_ws_and_comments(c);
  while (!c.done() && c.peek() != ']') {
    items.push_back(parse_value(c));
    skip_ws_and_comments(c);
    if (!c.done() && c.peek() == ',') {
      c.advance();
      skip_ws_and_comments(c);
    }
  }
  if (c.done()) c.fail("unterminated array");
  c.advance();  // ']'
  return ConfigValue{items};
}

ConfigValue parse_value(Cursor& c) {
  skip_ws_and_comments(c);
  if (c.done()) c.fail("expected a value");
  char ch = c.peek();
  if (ch == '[') return parse_array(c);
  if (ch == '"') {
    c.advance();
    std::string s;
    while (!c.done() && c.peek() != '"') {
      s.push_back(c.peek());
      c.advance();
    }
    if (c.done()) c.fail("unterminated string");
    c.advance();
    return ConfigValue{s};
  }
  std::string tok;
  while (!c.done()) {
    char t = c.peek();
    if (t == ',' || t == ']' || t == '\n' || t == '\r' || t == '#' || t == ' ' || t == '\t') break;
    tok.push_back(t);
    c.advance();
  }
  if (tok == "true") return ConfigValue{true};
  if (tok == "false") return ConfigValue{false};
  try {
    if (tok.find_first_of(".eEnN") == std::string::npos) {
      std::size_t pos = 0;
      long long i = std::stoll(tok, &pos);
      if (pos == tok.size()) return ConfigValue{i};
    }
    std::size_t pos = 0;
    double d = std::stod(tok, &pos);
    if (pos == tok.size()) return ConfigValue{d};
  } catch (const std::exception&) {
  }
  c.fail("cannot parse value '" + tok + "'");
}

}  // namespace

ConfigTable parse_config(const std::string& text) {
  ConfigTable table;
  Cursor c{text};
  std::string prefix;

  for (;;) {
    skip_ws_and_comments(c);
    if (c.done()) break;

    if (c.peek() == '[') {
      c.advance();
      std::string name;
      while (!c.done() && c.peek() != ']') {
        name.push_back(c.peek());
        c.advance();
      }
      if (c.done()) c.fail("unterminated table header");
      c.advance();
      prefix = name.empty() ? "" : name + ".";
      continue;
    }

    std::string key;
    while (!c.done()) {
      char ch = c.peek();
      if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.') {
        key.push_back(ch);
        c.advance();
      } else {
        break;
      }
    }
    if (key.empty()) c.fail("expected a key");
    c.skip_ws_inline();
    if (c.done() || c.peek() != '=') c.fail("expected '=' after key '" + key + "'");
    c.advance();
    c.skip_ws_inline();
    table[prefix + key] = parse_value(c);
  }
  return table;
}

ConfigTable parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

Eigen::VectorXd broadcast(const ConfigValue& v, int n, const std::string& key) {
  if (v.is_array()) {
    auto vals = v.as_double_vector();
    if (static_cast<int>(vals.size()) != n)
      throw std::runtime_error("config: '" + key + "' must have n entries");
    return Eigen::Map<const Eigen::VectorXd>(vals.data(), n);
  }
  return Eigen::VectorXd::Constant(n, v.as_double());
}

}  // namespace

MpetParameters load_parameters(const ConfigTable& table) {
  auto find = [&](const std::string& key) -> const ConfigValue* {
    auto it = table.find(key);
    return it == table.end() ? nullptr : &it->second;
  };

  int n = 1;
  if (auto* v = find("n")) n = static_cast<int>(v->as_int());
  MpetParameters p = MpetParameters::defaults(n);

  if (auto* v = find("mu")) p.mu = v->as_double();
  if (auto* v = find("lambda")) p.lambda = v->as_double();
  if (auto* v = find("rho_s")) p.rho_s = v->as_double();
  if (auto* v = find("tau")) p.tau = v->as_double();
  if (auto* v = find("t_final")) p.t_final = v->as_double();

  if (auto* v = find("phi")) p.phi = broadcast(*v, n, "phi");
  if (auto* v = find("rho")) p.rho = broadcast(*v, n, "rho");
  if (auto* v = find("rho_m")) p.rho_m = broadcast(*v, n, "rho_m");
  if (auto* v = find("K")) p.K = broadcast(*v, n, "K");
  if (auto* v = find("alpha_tilde")) p.alpha_tilde = broadcast(*v, n, "alpha_tilde");
  if (auto* v = find("c_p")) p.c_p = broadcast(*v, n, "c_p");

  if (auto* v = find("beta")) {
    p.beta_tilde.setConstant(v->as_double());
    p.beta_tilde.diagonal().setZero();
  }
  if (auto* v = find("beta_pairs")) {
    for (const auto& entry : v->as_array()) {
      const auto& triple = entry.as_array();
      if (triple.size() != 3) throw std::runtime_error("config: beta_pairs entries are [i, j, value]");
      int i = static_cast<int>(triple[0].as_int()) - 1;
      int j = static_cast<int>(triple[1].as_int()) - 1;
      if (i < 0 || j < 0 || i >= n || j >= n || i == j)
        throw std::runtime_error("config: beta_pairs network index out of range");
      p.beta_tilde(i, j) = p.beta_tilde(j, i) = triple[2].as_double();
    }
  }

  p.validate();
  return p;
}

MpetParameters load_parameters_file(const std::string& path) {
  return load_parameters(parse_config_file(path));
}

SweepConfig load_sweep_config(const ConfigTable& table) {
  SweepConfig cfg;
  auto find = [&](const std::string& key) -> const ConfigValue* {
    auto it = table.find(key);
    return it == table.end() ? nullptr : &it->second;
  };
  auto doubles = [&](const char* key, std::vector<double>& out) {
    if (auto* v = find(std::string("grid.") + key))
      out = v->is_array() ? v->as_double_vector() : std::vector<double>{v->as_double()};
  };

  doubles("mu", cfg.mu);
  doubles("lambda", cfg.lambda);
  doubles("K", cfg.K);
  doubles("c_p", cfg.c_p);
  doubles("beta", cfg.beta);
  doubles("tau", cfg.tau);
  if (auto* v = find("grid.n")) {
    cfg.n.clear();
    for (long long x : v->is_array() ? v->as_int_vector() : std::vector<long long>{v->as_int()})
      cfg.n.push_back(static_cast<int>(x));
  }
  if (auto* v = find("grid.mesh")) {
    cfg.mesh.clear();
    for (long long x : v->is_array() ? v->as_int_vector() : std::vector<long long>{v->as_int()})
      cfg.mesh.push_back(static_cast<int>(x));
  }

  if (auto* v = find("sweep.nx")) cfg.nx = static_cast<int>(v->as_int());
  if (auto* v = find("sweep.eta")) cfg.eta = v->as_double();
  if (auto* v = find("sweep.tol")) cfg.tol = v->as_double();
  if (auto* v = find("sweep.max_iter")) cfg.max_iter = static_cast<int>(v->as_int());
  if (auto* v = find("sweep.seed")) cfg.seed = static_cast<unsigned long long>(v->as_int());
  if (auto* v = find("sweep.jobs")) cfg.jobs = static_cast<int>(v->as_int());
  if (auto* v = find("sweep.dense_cap")) cfg.dense_cap = static_cast<int>(v->as_int());
  if (auto* v = find("sweep.spectrum")) cfg.run_spectrum = v->as_bool();
  if (auto* v = find("sweep.minres")) cfg.run_minres = v->as_bool();
  return cfg;
}

SweepConfig load_sweep_config_file(const std::string& path) {
  return load_sweep_config(parse_config_file(path));
}

}  // namespace mpet
