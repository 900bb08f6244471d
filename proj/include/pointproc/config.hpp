#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pointproc/errors.hpp"

namespace pointproc {

// Minimal TOML-subset reader: [table] and [[array of tables]] headers,
// key = value lines, scalar values (integer, float, bool, "string") and flat
// arrays that may span lines. Enough for experiment configs, with
// line-numbered errors.
namespace toml {

struct Value {
  enum class Type { Int, Float, Bool, String, Array };
  Type type = Type::Int;
  long long i = 0;
  double f = 0.0;
  bool b = false;
  std::string s;
  std::vector<Value> arr;
  int line = 0;

  double as_double() const {
    if (type == Type::Float) return f;
    if (type == Type::Int) return static_cast<double>(i);
    throw ConfigError(line, "expected a number");
  }
  long long as_int() const {
    if (type == Type::Int) return i;
    throw ConfigError(line, "expected an integer");
  }
  bool as_bool() const {
    if (type == Type::Bool) return b;
    throw ConfigError(line, "expected true/false");
  }
  const std::string& as_string() const {
    if (type == Type::String) return s;
    throw ConfigError(line, "expected a string");
  }
  std::vector<double> as_double_array() const {
    if (type != Type::Array) throw ConfigError(line, "expected an array");
    std::vector<double> out;
    for (const Value& v : arr) out.push_back(v.as_double());
    return out;
  }
  std::vector<std::string> as_string_array() const {
    if (type != Type::Array) throw ConfigError(line, "expected an array of strings");
    std::vector<std::string> out;
    for (const Value& v : arr) out.push_back(v.as_string());
    return out;
  }
};

struct Table {
  std::map<std::string, Value> values;
  int line = 0;

  bool has(const std::string& k) const { return values.count(k) > 0; }
  const Value& at(const std::string& k) const {
    auto it = values.find(k);
    if (it == values.end()) throw ConfigError(line, "missing required key '" + k + "'");
    return it->second;
  }
  template <class T>
  T get_or(const std::string& k, T fallback) const;
};

template <>
inline double Table::get_or<double>(const std::string& k, double fallback) const {
  return has(k) ? at(k).as_double() : fallback;
}
template <>
inline long long Table::get_or<long long>(const std::string& k, long long fallback) const {
  return has(k) ? at(k).as_int() : fallback;
}
template <>
inline bool Table::get_or<bool>(const std::string& k, bool fallback) const {
  return has(k) ? at(k).as_bool() : fallback;
}
template <>
inline std::string Table::get_or<std::string>(const std::string& k, std::string fallback) const {
  return has(k) ? at(k).as_string() : fallback;
}

struct Document {
  Table root;
  std::map<std::string, Table> tables;
  std::map<std::string, std::vector<Table>> table_arrays;

  const Table* table(const std::string& name) const {
    auto it = tables.find(name);
    return it == tables.end() ? nullptr : &it->second;
  }
};

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::string drop_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

inline Value parse_scalar(const std::string& tok, int line) {
  Value v;
  v.line = line;
  if (tok.empty()) throw ConfigError(line, "empty value");
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"')
      throw ConfigError(line, "unterminated string");
    v.type = Value::Type::String;
    v.s = tok.substr(1, tok.size() - 2);
    return v;
  }
  if (tok == "true" || tok == "false") {
    v.type = Value::Type::Bool;
    v.b = tok == "true";
    return v;
  }
  try {
    std::size_t used = 0;
    if (tok.find_first_of(".eE") == std::string::npos ||
        (tok.size() > 1 && (tok.rfind("0x", 0) == 0))) {
      const long long i = std::stoll(tok, &used, 0);
      if (used == tok.size()) {
        v.type = Value::Type::Int;
        v.i = i;
        return v;
      }
    }
    used = 0;
    const double f = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    v.type = Value::Type::Float;
    v.f = f;
    return v;
  } catch (const std::exception&) {
    throw ConfigError(line, "cannot parse value '" + tok + "'");
  }
}

inline Value parse_value(const std::string& text, int line) {
  const std::string t = strip(text);
  if (t.empty()) throw ConfigError(line, "missing value");
  if (t.front() != '[') return parse_scalar(t, line);
  if (t.back() != ']') throw ConfigError(line, "unterminated array");
  Value v;
  v.type = Value::Type::Array;
  v.line = line;
  std::string body = t.substr(1, t.size() - 2);
  std::string cur;
  bool in_str = false;
  int depth = 0;
  for (char c : body) {
    if (c == '"') in_str = !in_str;
    if (!in_str && c == '[') {
      ++depth;
      throw ConfigError(line, "nested arrays are not supported; use a flat row-major list");
    }
    if (!in_str && c == ']') --depth;
    if (c == ',' && !in_str && depth == 0) {
      const std::string tok = strip(cur);
      if (!tok.empty()) v.arr.push_back(parse_scalar(tok, line));
      cur.clear();
    } else {
      cur += c;
    }
  }
  const std::string tok = strip(cur);
  if (!tok.empty()) v.arr.push_back(parse_scalar(tok, line));
  return v;
}

}  // namespace detail

inline Document parse(const std::string& text) {
  Document doc;
  Table* current = &doc.root;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = detail::strip(detail::drop_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      const bool array_table = line.rfind("[[", 0) == 0;
      const std::string closer = array_table ? "]]" : "]";
      if (line.size() < closer.size() + (array_table ? 2 : 1) ||
          line.substr(line.size() - closer.size()) != closer)
        throw ConfigError(lineno, "malformed table header");
      const std::string name = detail::strip(
          line.substr(array_table ? 2 : 1, line.size() - 2 * (array_table ? 2 : 1)));
      if (name.empty()) throw ConfigError(lineno, "empty table name");
      if (array_table) {
        doc.table_arrays[name].emplace_back();
        current = &doc.table_arrays[name].back();
      } else {
        if (doc.tables.count(name)) throw ConfigError(lineno, "duplicate table '" + name + "'");
        current = &doc.tables[name];
      }
      current->line = lineno;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value'");
    const std::string key = detail::strip(line.substr(0, eq));
    if (key.empty()) throw ConfigError(lineno, "empty key");
    std::string value = detail::strip(line.substr(eq + 1));
    // Arrays may continue across lines until brackets balance.
    if (!value.empty() && value.front() == '[') {
      auto balance = [](const std::string& s) {
        int d = 0;
        bool in_str = false;
        for (char c : s) {
          if (c == '"') in_str = !in_str;
          if (!in_str && c == '[') ++d;
          if (!in_str && c == ']') --d;
        }
        return d;
      };
      while (balance(value) > 0 && std::getline(in, raw)) {
        ++lineno;
        value += " " + detail::strip(detail::drop_comment(raw));
      }
    }
    if (current->values.count(key))
      throw ConfigError(lineno, "duplicate key '" + key + "'");
    current->values[key] = detail::parse_value(value, lineno);
  }
  return doc;
}

inline Document parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

}  // namespace toml

// ---------------------------------------------------------------------------
// Experiment configuration (schema version 1).

struct ModelSpec {
  std::string family;  // poisson | gibbs | determinantal | poisson-window | gibbs-window
  int sites = 0;
  std::vector<double> activity;   // one entry, broadcast, or one per site
  std::vector<double> weights;    // reference lambda; default all 1
  std::vector<double> potential;  // row-major m*m; "inf" encoded as a large/inf float
  std::vector<double> kernel;     // row-major m*m
  std::vector<double> window;     // [lo1, hi1, lo2, hi2, ...]
  double intensity = 1.0;
  double hardcore_radius = 0.0;
  double ref_density = 1.0;
};

struct EstimatorSpec {
  std::string mode = "exact";  // exact | mc
  long samples = 20000;
  std::uint64_t seed = 1;
  long burn_in = -1;
  long steps_per_sample = 0;
  int replicas = 1;
  int quad_nodes = 64;
};

struct CheckSpec {
  std::string kind;
  std::string F = "one";
  std::vector<std::string> us;  // process fixtures; single entry broadcasts over n
  std::vector<std::string> vs;  // deterministic fixtures for correlation moments
  std::string compound = "geometric:0.5";
  int n = 1;
  std::optional<double> tolerance;
  int line = 0;
};

struct ShiftSpec {
  std::string kind;  // permutation | conditional-swap | translation
  std::vector<int> perm;  // 1-based images
  int swap_a = 1, swap_b = 2, zone = 4;  // 1-based sites
  std::vector<double> delta;
};

struct ExperimentConfig {
  int version = 1;
  ModelSpec model;
  EstimatorSpec estimator;
  std::vector<CheckSpec> checks;
  std::optional<ShiftSpec> shift;
  std::string out_dir;
  long sample_count = 100;
};

inline ExperimentConfig parse_experiment_config(const toml::Document& doc) {
  ExperimentConfig cfg;
  cfg.version = static_cast<int>(doc.root.get_or<long long>("version", 1));
  if (cfg.version != 1) throw ConfigError(doc.root.line, "unsupported config version");

  const toml::Table* model = doc.table("model");
  if (!model) throw ConfigError(0, "missing [model] table");
  cfg.model.family = model->at("family").as_string();
  cfg.model.sites = static_cast<int>(model->get_or<long long>("sites", 0));
  if (model->has("activity")) {
    const auto& v = model->at("activity");
    cfg.model.activity = v.type == toml::Value::Type::Array ? v.as_double_array()
                                                            : std::vector<double>{v.as_double()};
  }
  if (model->has("weights")) cfg.model.weights = model->at("weights").as_double_array();
  if (model->has("potential")) cfg.model.potential = model->at("potential").as_double_array();
  if (model->has("kernel")) cfg.model.kernel = model->at("kernel").as_double_array();
  if (model->has("window")) cfg.model.window = model->at("window").as_double_array();
  cfg.model.intensity = model->get_or<double>("intensity", 1.0);
  cfg.model.hardcore_radius = model->get_or<double>("hardcore_radius", 0.0);
  cfg.model.ref_density = model->get_or<double>("ref_density", 1.0);

  if (const toml::Table* est = doc.table("estimator")) {
    cfg.estimator.mode = est->get_or<std::string>("mode", "exact");
    cfg.estimator.samples = static_cast<long>(est->get_or<long long>("samples", 20000));
    cfg.estimator.seed = static_cast<std::uint64_t>(est->get_or<long long>("seed", 1));
    cfg.estimator.burn_in = static_cast<long>(est->get_or<long long>("burn_in", -1));
    cfg.estimator.steps_per_sample =
        static_cast<long>(est->get_or<long long>("steps_per_sample", 0));
    cfg.estimator.replicas = static_cast<int>(est->get_or<long long>("replicas", 1));
    cfg.estimator.quad_nodes = static_cast<int>(est->get_or<long long>("quad_nodes", 64));
    if (cfg.estimator.mode != "exact" && cfg.estimator.mode != "mc")
      throw ConfigError(est->line, "estimator mode must be 'exact' or 'mc'");
  }

  auto checks = doc.table_arrays.find("check");
  if (checks != doc.table_arrays.end()) {
    for (const toml::Table& t : checks->second) {
      CheckSpec c;
      c.line = t.line;
      c.kind = t.at("kind").as_string();
      c.F = t.get_or<std::string>("F", "one");
      if (t.has("u")) {
        const auto& v = t.at("u");
        c.us = v.type == toml::Value::Type::Array ? v.as_string_array()
                                                  : std::vector<std::string>{v.as_string()};
      }
      if (t.has("v")) {
        const auto& v = t.at("v");
        c.vs = v.type == toml::Value::Type::Array ? v.as_string_array()
                                                  : std::vector<std::string>{v.as_string()};
      }
      c.compound = t.get_or<std::string>("compound", "geometric:0.5");
      c.n = static_cast<int>(t.get_or<long long>("n", 1));
      if (t.has("tolerance")) c.tolerance = t.at("tolerance").as_double();
      cfg.checks.push_back(std::move(c));
    }
  }

  if (const toml::Table* sh = doc.table("shift")) {
    ShiftSpec s;
    s.kind = sh->at("kind").as_string();
    if (sh->has("perm")) {
      for (double v : sh->at("perm").as_double_array()) s.perm.push_back(static_cast<int>(v));
    }
    s.swap_a = static_cast<int>(sh->get_or<long long>("swap_a", 1));
    s.swap_b = static_cast<int>(sh->get_or<long long>("swap_b", 2));
    s.zone = static_cast<int>(sh->get_or<long long>("zone", 4));
    if (sh->has("delta")) s.delta = sh->at("delta").as_double_array();
    cfg.shift = std::move(s);
  }

  if (const toml::Table* out = doc.table("output")) {
    cfg.out_dir = out->get_or<std::string>("dir", "");
  }
  if (const toml::Table* smp = doc.table("sample")) {
    cfg.sample_count = static_cast<long>(smp->get_or<long long>("count", 100));
  }
  return cfg;
}

}  // namespace pointproc
