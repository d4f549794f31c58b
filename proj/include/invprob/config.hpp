// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/errors.hpp"
#include "invprob/io.hpp"
#include "invprob/multi_index.hpp"
#include "invprob/operators.hpp"

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace invprob {

/// One additive coordinate of an experiment.
struct AdditiveComponentConfig
{
  double s = 1.0;
  double q = 0.0;
  double radius = 1.0;
  double c = 1.0;
  int axis = 0;

  friend bool operator==(const AdditiveComponentConfig&, const AdditiveComponentConfig&) = default;
};

struct ExperimentConfig
{
  std::string model = "white-noise";     ///< white-noise | density | tomography
  std::string estimator = "dense";       ///< delta-net | dense | additive

  // operator
  std::string op_kind = "convolution";
  double q = 1.0;
  double op_c = 1.0;
  std::map<std::string, double> singular_overrides;

  // function class
  std::string family = "trig";
  int d = 1;
  double s = 2.0;
  double radius = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;

  // truth
  std::string truth = "decaying";        ///< decaying | density | coefficients
  int truth_support = 64;
  double truth_fill = 0.9;
  double truth_tau = 0.25;
  double truth_amplitude = 0.3;
  std::map<std::string, double> truth_coefficients;

  // estimator
  double delta = 0.0;                    ///< 0 selects the matched delta(n)
  double truncation_delta = 0.005;       ///< dense truncation M via the tail bound
  std::uint64_t net_cap = std::uint64_t{1} << 24;

  // additive
  std::vector<AdditiveComponentConfig> components;
  double additive_c = 1.0;

  // oracle risk bound
  double xi = 0.26;
  double c_tau = 32.0;

  // run
  std::vector<double> ns = {256, 1024, 4096, 16384, 65536};
  std::size_t reps = 200;
  std::uint64_t master_seed = 1;
  std::vector<double> deltas = {0.4, 0.2, 0.1, 0.05};
  std::string output_dir = "out";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline long line_of(const toml::node& n)
{
  return static_cast<long>(n.source().begin.line);
}

inline toml::table json_to_toml(const nlohmann::json& j);

inline void json_insert(toml::array& arr, const nlohmann::json& v);

inline void json_insert(toml::table& t, const std::string& key, const nlohmann::json& v)
{
  if (v.is_object())
    t.insert(key, json_to_toml(v));
  else if (v.is_array()) {
    toml::array arr;
    for (const auto& e : v)
      json_insert(arr, e);
    t.insert(key, std::move(arr));
  } else if (v.is_boolean())
    t.insert(key, v.get<bool>());
  else if (v.is_number_integer())
    t.insert(key, v.get<std::int64_t>());
  else if (v.is_number_unsigned())
    t.insert(key, static_cast<std::int64_t>(v.get<std::uint64_t>()));
  else if (v.is_number_float())
    t.insert(key, v.get<double>());
  else if (v.is_string())
    t.insert(key, v.get<std::string>());
  else
    throw ConfigError("unsupported JSON value for '" + key + "'");
}

inline void json_insert(toml::array& arr, const nlohmann::json& v)
{
  if (v.is_object())
    arr.push_back(json_to_toml(v));
  else if (v.is_number_integer())
    arr.push_back(v.get<std::int64_t>());
  else if (v.is_number_unsigned())
    arr.push_back(static_cast<std::int64_t>(v.get<std::uint64_t>()));
  else if (v.is_number_float())
    arr.push_back(v.get<double>());
  else if (v.is_string())
    arr.push_back(v.get<std::string>());
  else if (v.is_boolean())
    arr.push_back(v.get<bool>());
  else
    throw ConfigError("unsupported JSON array element");
}

inline toml::table json_to_toml(const nlohmann::json& j)
{
  if (!j.is_object()) throw ConfigError("configuration root must be an object");
  toml::table t;
  for (const auto& [k, v] : j.items())
    json_insert(t, k, v);
  return t;
}

// Typed field readers; errors carry the line of the offending node.
class Reader
{
public:
  explicit Reader(const toml::table& t)
    : t_(t)
  {
  }

  template<class T>
  void get(const char* key, T& out) const
  {
    const auto* n = t_.get(key);
    if (!n) return;
    if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = n->value<std::string>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_same_v<T, double>) {
      if (auto v = n->value<double>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_integral_v<T>) {
      if (auto v = n->value<std::int64_t>()) {
        if (*v < 0 && std::is_unsigned_v<T>) throw ConfigError(std::string(key) + " must be non-negative", line_of(*n));
        out = static_cast<T>(*v);
        return;
      }
    }
    throw ConfigError(std::string("wrong type for '") + key + "'", line_of(*n));
  }

  void get_doubles(const char* key, std::vector<double>& out) const
  {
    const auto* n = t_.get(key);
    if (!n) return;
    const auto* arr = n->as_array();
    if (!arr) throw ConfigError(std::string("'") + key + "' must be an array", line_of(*n));
    out.clear();
    for (const auto& e : *arr) {
      auto v = e.value<double>();
      if (!v) throw ConfigError(std::string("'") + key + "' must hold numbers", line_of(e));
      out.push_back(*v);
    }
  }

  /// `index:value` strings, or a table of index = value.
  void get_index_map(const char* key, std::map<std::string, double>& out) const
  {
    const auto* n = t_.get(key);
    if (!n) return;
    out.clear();
    if (const auto* tab = n->as_table()) {
      for (const auto& [k, v] : *tab) {
        auto x = v.value<double>();
        if (!x) throw ConfigError(std::string("'") + key + "' values must be numbers", line_of(v));
        out[std::string(k.str())] = *x;
      }
      return;
    }
    const auto* arr = n->as_array();
    if (!arr) throw ConfigError(std::string("'") + key + "' must be an index:value list", line_of(*n));
    for (const auto& e : *arr) {
      auto s = e.value<std::string>();
      if (!s) throw ConfigError(std::string("'") + key + "' entries must be strings", line_of(e));
      const auto colon = s->rfind(':');
      if (colon == std::string::npos)
        throw ConfigError(std::string("'") + key + "' entry '" + *s + "' is not index:value", line_of(e));
      try {
        parse_index(s->substr(0, colon));
        out[s->substr(0, colon)] = parse_double(s->substr(colon + 1));
      } catch (const InvalidArgument& ex) {
        throw ConfigError(ex.what(), line_of(e));
      }
    }
  }

  const toml::table* table(const char* key) const
  {
    const auto* n = t_.get(key);
    if (!n) return nullptr;
    if (!n->as_table()) throw ConfigError(std::string("'") + key + "' must be a table", line_of(*n));
    return n->as_table();
  }

  const toml::table& raw() const { return t_; }

private:
  const toml::table& t_;
};

inline long key_line(const toml::table& t, const char* key)
{
  const auto* n = t.get(key);
  return n ? line_of(*n) : 0;
}

} // namespace detail

/// Rejects inconsistent combinations before any computation starts.
inline void validate_config(const ExperimentConfig& c, const toml::table* src = nullptr)
{
  auto line = [&](const char* key) { return src ? detail::key_line(*src, key) : 0L; };
  if (c.model != "white-noise" && c.model != "density" && c.model != "tomography")
    throw ConfigError("model must be white-noise, density or tomography", line("model"));
  if (c.estimator != "delta-net" && c.estimator != "dense" && c.estimator != "additive")
    throw ConfigError("estimator must be delta-net, dense or additive", line("estimator"));
  if (c.s <= 0.0) throw ConfigError("class.s must be positive", line("class"));
  if (c.radius <= 0.0) throw ConfigError("class.L must be positive", line("class"));
  if (c.c1 <= 0.0 || c.c2 < c.c1) throw ConfigError("class constants need 0 < C1 <= C2", line("class"));
  if (c.d < 1 || c.d > kMaxDim) throw ConfigError("class.d out of range", line("class"));
  try {
    operator_kind_from_string(c.op_kind);
    basis_family_from_string(c.family);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what(), line("operator"));
  }
  if (c.q < 0.0) throw ConfigError("operator.q must be non-negative", line("operator"));
  if (c.model == "tomography" && c.op_kind != "tomography2d")
    throw ConfigError("tomography model needs operator kind tomography2d", line("model"));
  if (c.model != "tomography" && c.op_kind == "tomography2d")
    throw ConfigError("operator tomography2d is only valid with the tomography model", line("operator"));
  if (c.estimator == "additive") {
    if (c.model != "white-noise") throw ConfigError("the additive estimator needs the white-noise model", line("estimator"));
    if (c.components.size() < 2) throw ConfigError("additive estimator needs at least two components", line("additive"));
    for (const auto& comp : c.components)
      if (comp.s <= 0.0 || comp.q < 0.0 || comp.radius <= 0.0 || comp.c <= 0.0 || comp.axis < 0 || comp.axis >= c.d)
        throw ConfigError("invalid additive component", line("additive"));
    if (c.additive_c <= 0.0) throw ConfigError("additive.c must be positive", line("additive"));
  }
  if (c.truth != "decaying" && c.truth != "density" && c.truth != "coefficients")
    throw ConfigError("truth.kind must be decaying, density or coefficients", line("truth"));
  if (c.model != "white-noise" && c.truth == "decaying")
    throw ConfigError("density models need a density truth (truth.kind = density or coefficients)", line("truth"));
  if (c.ns.empty()) throw ConfigError("ns must not be empty", line("ns"));
  for (double n : c.ns)
    if (!(n >= 1.0)) throw ConfigError("every n must be at least 1", line("ns"));
  if (c.delta < 0.0) throw ConfigError("delta must be non-negative", line("estimator_params"));
  if (c.truncation_delta <= 0.0) throw ConfigError("truncation_delta must be positive", line("estimator_params"));
  if (c.xi <= 0.0 || c.c_tau <= 0.0) throw ConfigError("xi and C_tau must be positive", line("bounds"));
  if (c.reps < 1) throw ConfigError("reps must be at least 1", line("reps"));
}

/// Reads a config table; JSON input is converted first and reports no lines.
inline ExperimentConfig config_from_table(const toml::table& t)
{
  ExperimentConfig c;
  const detail::Reader r(t);
  r.get("model", c.model);
  r.get("estimator", c.estimator);
  r.get_doubles("ns", c.ns);
  r.get("reps", c.reps);
  r.get("master_seed", c.master_seed);
  r.get("output_dir", c.output_dir);
  r.get_doubles("deltas", c.deltas);
  if (const auto* op = r.table("operator")) {
    const detail::Reader o(*op);
    o.get("kind", c.op_kind);
    o.get("q", c.q);
    o.get("c", c.op_c);
    o.get_index_map("singular_values", c.singular_overrides);
  }
  if (const auto* cl = r.table("class")) {
    const detail::Reader o(*cl);
    o.get("family", c.family);
    o.get("d", c.d);
    o.get("s", c.s);
    o.get("L", c.radius);
    o.get("C1", c.c1);
    o.get("C2", c.c2);
  }
  if (const auto* tr = r.table("truth")) {
    const detail::Reader o(*tr);
    o.get("kind", c.truth);
    o.get("support", c.truth_support);
    o.get("fill", c.truth_fill);
    o.get("tau", c.truth_tau);
    o.get("amplitude", c.truth_amplitude);
    o.get_index_map("coefficients", c.truth_coefficients);
  }
  if (const auto* ep = r.table("estimator_params")) {
    const detail::Reader o(*ep);
    o.get("delta", c.delta);
    o.get("truncation_delta", c.truncation_delta);
    o.get("net_cap", c.net_cap);
  }
  if (const auto* b = r.table("bounds")) {
    const detail::Reader o(*b);
    o.get("xi", c.xi);
    o.get("C_tau", c.c_tau);
  }
  if (const auto* add = r.table("additive")) {
    const detail::Reader o(*add);
    o.get("c", c.additive_c);
    if (const auto* n = add->get("components")) {
      const auto* arr = n->as_array();
      if (!arr) throw ConfigError("additive.components must be an array of tables", detail::line_of(*n));
      c.components.clear();
      for (const auto& e : *arr) {
        const auto* et = e.as_table();
        if (!et) throw ConfigError("additive.components entries must be tables", detail::line_of(e));
        const detail::Reader ce(*et);
        AdditiveComponentConfig comp;
        ce.get("s", comp.s);
        ce.get("q", comp.q);
        ce.get("L", comp.radius);
        ce.get("c", comp.c);
        ce.get("axis", comp.axis);
        c.components.push_back(comp);
      }
    }
  }
  validate_config(c, &t);
  // disk operators fix d = 2; an explicit other value is a mistake, not a hint
  if (const auto* cl = r.table("class"); cl && (c.op_kind == "radon2d" || c.op_kind == "tomography2d")) {
    if (cl->contains("d") && c.d != 2)
      throw ConfigError(c.op_kind + " is defined only for d = 2", detail::key_line(*cl, "d"));
  }
  return c;
}

inline ExperimentConfig parse_config_toml(const std::string& text, const std::string& source = "config")
{
  try {
    const auto t = toml::parse(text, source);
    return config_from_table(t);
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string(e.description()), static_cast<long>(e.source().begin.line));
  }
}

inline ExperimentConfig parse_config_json(const std::string& text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    long line = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(e.what(), line);
  }
  return config_from_table(detail::json_to_toml(j));
}

/// Chooses the parser from the extension (.json) or the first non-blank character.
inline ExperimentConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool json = (path.size() > 5 && path.substr(path.size() - 5) == ".json")
                    || (first != std::string::npos && text[first] == '{');
  return json ? parse_config_json(text) : parse_config_toml(text, path);
}

/// Full resolved configuration, defaults included.
inline nlohmann::json config_to_json(const ExperimentConfig& c)
{
  nlohmann::json j;
  j["model"] = c.model;
  j["estimator"] = c.estimator;
  j["ns"] = c.ns;
  j["reps"] = c.reps;
  j["master_seed"] = c.master_seed;
  j["output_dir"] = c.output_dir;
  j["deltas"] = c.deltas;
  j["operator"] = {{"kind", c.op_kind}, {"q", c.q}, {"c", c.op_c}, {"singular_values", c.singular_overrides}};
  j["class"] = {{"family", c.family}, {"d", c.d}, {"s", c.s}, {"L", c.radius}, {"C1", c.c1}, {"C2", c.c2}};
  j["truth"] = {{"kind", c.truth},          {"support", c.truth_support},     {"fill", c.truth_fill},
                {"tau", c.truth_tau},       {"amplitude", c.truth_amplitude}, {"coefficients", c.truth_coefficients}};
  j["estimator_params"] = {{"delta", c.delta}, {"truncation_delta", c.truncation_delta}, {"net_cap", c.net_cap}};
  j["bounds"] = {{"xi", c.xi}, {"C_tau", c.c_tau}};
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& comp : c.components)
    comps.push_back({{"s", comp.s}, {"q", comp.q}, {"L", comp.radius}, {"c", comp.c}, {"axis", comp.axis}});
  j["additive"] = {{"c", c.additive_c}, {"components", comps}};
  return j;
}

} // namespace invprob
