#pragma once

// Declarative run configuration (TOML) for the command-line tool.
//
//   model = "info"              # or "random_bridge"
//   seed = 20240601
//   out_dir = "out"
//   [length]  kind = "exponential", rate = 0.1
//   [pin]     kind = "two_point", z1 = -4.0, z2 = 4.0, p1 = 0.3
//   [grid]    t_max = 20.0, n_steps = 2000
//
// Every table rejects keys it does not know, and to_string() writes a file
// that parses back to an equal Config.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>

#include "rbb/distributions.hpp"
#include "rbb/errors.hpp"
#include "rbb/info_process.hpp"
#include "rbb/random_bridge.hpp"
#include "rbb/verification.hpp"

namespace rbb::config {

struct LengthSpec {
  std::string kind = "exponential";  // exponential | uniform | point_mass | two_point | table | atoms
  double rate = 0.1;
  double offset = 0.0;
  double lo = 0.0;
  double hi = 1.0;
  double t = 1.0;
  double t1 = 1.0;
  double t2 = 2.0;
  double w1 = 0.5;
  std::vector<double> knots;
  std::vector<double> values;  // table densities at knots
  std::vector<double> times;   // atoms
  std::vector<double> weights;

  bool operator==(const LengthSpec&) const = default;
  LengthLaw law() const;
};

struct PinSpec {
  std::string kind = "two_point";  // two_point | discrete | binomial | gaussian | uniform
  double z1 = -1.0;
  double z2 = 1.0;
  double p1 = 0.5;
  std::vector<double> points;
  std::vector<double> probs;
  std::int64_t n = 1;
  double p = 0.5;
  double mean = 0.0;
  double sd = 1.0;
  double lo = 0.0;
  double hi = 1.0;

  bool operator==(const PinSpec&) const = default;
  PinLaw law() const;
};

struct GridSpec {
  double t_max = 10.0;
  std::int64_t n_steps = 1000;

  bool operator==(const GridSpec&) const = default;
  std::vector<double> times() const { return uniform_grid(t_max, static_cast<std::size_t>(n_steps)); }
};

struct SimulateSpec {
  std::string name = "paths";    // output file stem
  std::int64_t paths = 10;
  std::string method = "exact";  // exact | euler (info model only)
  bool until_absorbed = false;   // extend each path past t_max until it is pinned

  bool operator==(const SimulateSpec&) const = default;
};

struct DensitySpec {
  std::string kind = "marginal";  // marginal | transition | info_transition
  double r = 1.0;                 // deterministic bridge length and pin
  double z = 0.0;
  double t = 0.5;
  double x = 0.0;
  double u = 1.0;
  bool absorbed = false;
  double y_min = -3.0;
  double y_max = 3.0;
  std::int64_t points = 61;

  bool operator==(const DensitySpec&) const = default;
};

struct FilterSpec {
  std::string observations;  // CSV with header t,value[,absorbed]

  bool operator==(const FilterSpec&) const = default;
};

struct VerifySpec {
  std::vector<std::string> suites{"all"};
  double alpha = 0.01;
  double drift_scale = 1.0;
  verify::Sizes sizes;

  bool operator==(const VerifySpec&) const = default;
};

struct Config {
  std::string model = "info";  // info | random_bridge
  std::uint64_t seed = 20240601;
  std::string out_dir = "out";
  LengthSpec length;
  PinSpec pin;
  GridSpec grid;
  SimulateSpec simulate;
  DensitySpec density;
  FilterSpec filter;
  VerifySpec verify;

  bool operator==(const Config&) const = default;

  void validate() const;
  RandomBridgeModel random_bridge_model() const { return {length.law(), pin.law()}; }
  InfoModel info_model() const;
  verify::SuiteConfig suite_config() const;
};

// ---------------------------------------------------------------------------
// Laws

inline LengthLaw LengthSpec::law() const {
  if (kind == "exponential") return LengthLaw::exponential(rate, offset);
  if (kind == "uniform") return LengthLaw::uniform(lo, hi);
  if (kind == "point_mass") return LengthLaw::point_mass(t);
  if (kind == "two_point") return LengthLaw::two_point(t1, t2, w1);
  if (kind == "table") return LengthLaw::table(knots, values);
  if (kind == "atoms") {
    if (times.size() != weights.size() || times.empty()) {
      throw InputError("length.atoms: times and weights must be non-empty and of equal size");
    }
    std::vector<LengthLaw::Atom> atoms;
    for (std::size_t k = 0; k < times.size(); ++k) atoms.push_back({times[k], weights[k]});
    return LengthLaw::atoms_only(std::move(atoms));
  }
  throw InputError("length.kind: unknown kind '" + kind + "'");
}

inline PinLaw PinSpec::law() const {
  if (kind == "two_point") return PinLaw::discrete({z1, z2}, {p1, 1.0 - p1});
  if (kind == "discrete") return PinLaw::discrete(points, probs);
  if (kind == "binomial") {
    if (n < 1 || n > 10000) throw InputError("pin.binomial: need 1 <= n <= 10000");
    return PinLaw::binomial(static_cast<int>(n), p);
  }
  if (kind == "gaussian") return PinLaw::gaussian(mean, sd);
  if (kind == "uniform") return PinLaw::uniform(lo, hi);
  throw InputError("pin.kind: unknown kind '" + kind + "'");
}

inline InfoModel Config::info_model() const {
  if (pin.kind != "two_point") throw InputError("model 'info' needs pin.kind = \"two_point\"");
  InfoModel m{length.law(), pin.z1, pin.z2, pin.p1};
  m.validate();
  return m;
}

inline verify::SuiteConfig Config::suite_config() const {
  verify::SuiteConfig c;
  c.seed = seed;
  c.alpha = verify.alpha;
  c.drift_scale = verify.drift_scale;
  c.sizes = verify.sizes;
  c.config_hash = c.hash();
  return c;
}

inline void Config::validate() const {
  if (model != "info" && model != "random_bridge") throw InputError("model: expected \"info\" or \"random_bridge\"");
  if (!(grid.t_max > 0.0) || !std::isfinite(grid.t_max)) throw InputError("grid.t_max must be > 0");
  if (grid.n_steps < 1) throw InputError("grid.n_steps must be >= 1");
  if (simulate.paths < 1) throw InputError("simulate.paths must be >= 1");
  if (simulate.method != "exact" && simulate.method != "euler") {
    throw InputError("simulate.method: expected \"exact\" or \"euler\"");
  }
  if (simulate.method == "euler" && model != "info") throw InputError("simulate.method = \"euler\" needs model = \"info\"");
  if (density.kind != "marginal" && density.kind != "transition" && density.kind != "info_transition") {
    throw InputError("density.kind: expected marginal, transition or info_transition");
  }
  if (density.points < 1) throw InputError("density.points must be >= 1");
  if (!(density.y_max >= density.y_min)) throw InputError("density.y_max must be >= density.y_min");
  if (!(verify.alpha > 0.0 && verify.alpha < 1.0)) throw InputError("verify.alpha must lie in (0, 1)");
  try {
    if (model == "info") {
      (void)info_model();
    } else {
      (void)random_bridge_model();
    }
  } catch (const DomainError& e) {
    throw InputError(std::string("invalid law: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// TOML reading

namespace detail {

inline void check_keys(const toml::table& t, std::string_view where, std::initializer_list<std::string_view> known) {
  const std::set<std::string_view> allowed(known);
  for (const auto& [k, v] : t) {
    if (!allowed.contains(k.str())) {
      throw InputError(std::string(where) + ": unknown key '" + std::string(k.str()) + "'");
    }
  }
}

inline std::string path_of(std::string_view where, std::string_view key) {
  return where.empty() ? std::string(key) : std::string(where) + "." + std::string(key);
}

inline void read(const toml::table& t, std::string_view where, std::string_view key, double& out) {
  const auto* n = t.get(key);
  if (!n) return;
  if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer())) {
    out = *v;
    return;
  }
  throw InputError(path_of(where, key) + ": expected a number");
}

inline void read(const toml::table& t, std::string_view where, std::string_view key, std::int64_t& out) {
  const auto* n = t.get(key);
  if (!n) return;
  if (!n->is_integer()) throw InputError(path_of(where, key) + ": expected an integer");
  out = *n->value<std::int64_t>();
}

inline void read(const toml::table& t, std::string_view where, std::string_view key, bool& out) {
  const auto* n = t.get(key);
  if (!n) return;
  if (!n->is_boolean()) throw InputError(path_of(where, key) + ": expected true or false");
  out = *n->value<bool>();
}

inline void read(const toml::table& t, std::string_view where, std::string_view key, std::string& out) {
  const auto* n = t.get(key);
  if (!n) return;
  if (!n->is_string()) throw InputError(path_of(where, key) + ": expected a string");
  out = *n->value<std::string>();
}

inline void read(const toml::table& t, std::string_view where, std::string_view key, std::vector<double>& out) {
  const auto* n = t.get(key);
  if (!n) return;
  const auto* arr = n->as_array();
  if (!arr) throw InputError(path_of(where, key) + ": expected an array of numbers");
  out.clear();
  for (const auto& e : *arr) {
    auto v = e.value<double>();
    if (!v || !(e.is_floating_point() || e.is_integer())) {
      throw InputError(path_of(where, key) + ": expected an array of numbers");
    }
    out.push_back(*v);
  }
}

inline void read(const toml::table& t, std::string_view where, std::string_view key, std::vector<std::string>& out) {
  const auto* n = t.get(key);
  if (!n) return;
  if (n->is_string()) {
    out = {*n->value<std::string>()};
    return;
  }
  const auto* arr = n->as_array();
  if (!arr) throw InputError(path_of(where, key) + ": expected a string or an array of strings");
  out.clear();
  for (const auto& e : *arr) {
    if (!e.is_string()) throw InputError(path_of(where, key) + ": expected an array of strings");
    out.push_back(*e.value<std::string>());
  }
}

inline void read(const toml::table& t, std::string_view where, std::string_view key, std::size_t& out) {
  std::int64_t v = static_cast<std::int64_t>(out);
  read(t, where, key, v);
  if (v < 1) throw InputError(path_of(where, key) + ": must be >= 1");
  out = static_cast<std::size_t>(v);
}

inline const toml::table* section(const toml::table& root, std::string_view key) {
  const auto* n = root.get(key);
  if (!n) return nullptr;
  const auto* t = n->as_table();
  if (!t) throw InputError(std::string(key) + ": expected a table");
  return t;
}

}  // namespace detail

inline Config from_toml(const toml::table& root) {
  using detail::read;
  Config c;
  detail::check_keys(root, "config",
                     {"model", "seed", "out_dir", "length", "pin", "grid", "simulate", "density", "filter", "verify"});
  read(root, "", "model", c.model);
  if (const auto* n = root.get("seed")) {
    if (!n->is_integer() || *n->value<std::int64_t>() < 0) throw InputError("seed: expected a non-negative integer");
    c.seed = static_cast<std::uint64_t>(*n->value<std::int64_t>());
  }
  read(root, "", "out_dir", c.out_dir);

  if (const auto* t = detail::section(root, "length")) {
    detail::check_keys(*t, "length",
                       {"kind", "rate", "offset", "lo", "hi", "t", "t1", "t2", "w1", "knots", "values", "times", "weights"});
    auto& l = c.length;
    read(*t, "length", "kind", l.kind);
    read(*t, "length", "rate", l.rate);
    read(*t, "length", "offset", l.offset);
    read(*t, "length", "lo", l.lo);
    read(*t, "length", "hi", l.hi);
    read(*t, "length", "t", l.t);
    read(*t, "length", "t1", l.t1);
    read(*t, "length", "t2", l.t2);
    read(*t, "length", "w1", l.w1);
    read(*t, "length", "knots", l.knots);
    read(*t, "length", "values", l.values);
    read(*t, "length", "times", l.times);
    read(*t, "length", "weights", l.weights);
  }
  if (const auto* t = detail::section(root, "pin")) {
    detail::check_keys(*t, "pin", {"kind", "z1", "z2", "p1", "points", "probs", "n", "p", "mean", "sd", "lo", "hi"});
    auto& p = c.pin;
    read(*t, "pin", "kind", p.kind);
    read(*t, "pin", "z1", p.z1);
    read(*t, "pin", "z2", p.z2);
    read(*t, "pin", "p1", p.p1);
    read(*t, "pin", "points", p.points);
    read(*t, "pin", "probs", p.probs);
    read(*t, "pin", "n", p.n);
    read(*t, "pin", "p", p.p);
    read(*t, "pin", "mean", p.mean);
    read(*t, "pin", "sd", p.sd);
    read(*t, "pin", "lo", p.lo);
    read(*t, "pin", "hi", p.hi);
  }
  if (const auto* t = detail::section(root, "grid")) {
    detail::check_keys(*t, "grid", {"t_max", "n_steps"});
    read(*t, "grid", "t_max", c.grid.t_max);
    read(*t, "grid", "n_steps", c.grid.n_steps);
  }
  if (const auto* t = detail::section(root, "simulate")) {
    detail::check_keys(*t, "simulate", {"name", "paths", "method", "until_absorbed"});
    read(*t, "simulate", "name", c.simulate.name);
    read(*t, "simulate", "paths", c.simulate.paths);
    read(*t, "simulate", "method", c.simulate.method);
    read(*t, "simulate", "until_absorbed", c.simulate.until_absorbed);
  }
  if (const auto* t = detail::section(root, "density")) {
    detail::check_keys(*t, "density", {"kind", "r", "z", "t", "x", "u", "absorbed", "y_min", "y_max", "points"});
    auto& d = c.density;
    read(*t, "density", "kind", d.kind);
    read(*t, "density", "r", d.r);
    read(*t, "density", "z", d.z);
    read(*t, "density", "t", d.t);
    read(*t, "density", "x", d.x);
    read(*t, "density", "u", d.u);
    read(*t, "density", "absorbed", d.absorbed);
    read(*t, "density", "y_min", d.y_min);
    read(*t, "density", "y_max", d.y_max);
    read(*t, "density", "points", d.points);
  }
  if (const auto* t = detail::section(root, "filter")) {
    detail::check_keys(*t, "filter", {"observations"});
    read(*t, "filter", "observations", c.filter.observations);
  }
  if (const auto* t = detail::section(root, "verify")) {
    detail::check_keys(*t, "verify", {"suites", "alpha", "drift_scale", "sizes"});
    read(*t, "verify", "suites", c.verify.suites);
    read(*t, "verify", "alpha", c.verify.alpha);
    read(*t, "verify", "drift_scale", c.verify.drift_scale);
    if (const auto* s = detail::section(*t, "sizes")) {
      auto& z = c.verify.sizes;
      detail::check_keys(*s, "verify.sizes",
                         {"modification_paths", "markov_paths", "non_markov_paths", "transition_paths",
                          "posterior_paths", "posterior_mc_paths", "drift_draws", "euler_paths", "innovation_paths",
                          "continuity_steps"});
      const std::string_view w = "verify.sizes";
      read(*s, w, "modification_paths", z.modification_paths);
      read(*s, w, "markov_paths", z.markov_paths);
      read(*s, w, "non_markov_paths", z.non_markov_paths);
      read(*s, w, "transition_paths", z.transition_paths);
      read(*s, w, "posterior_paths", z.posterior_paths);
      read(*s, w, "posterior_mc_paths", z.posterior_mc_paths);
      read(*s, w, "drift_draws", z.drift_draws);
      read(*s, w, "euler_paths", z.euler_paths);
      read(*s, w, "innovation_paths", z.innovation_paths);
      read(*s, w, "continuity_steps", z.continuity_steps);
    }
  }
  c.validate();
  return c;
}

inline Config parse_string(std::string_view text, std::string_view source = "config") {
  try {
    return from_toml(toml::parse(text, source));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw InputError(os.str());
  }
}

/// Relative `filter.observations` paths are taken relative to the file.
inline Config parse_file(const std::string& path) {
  try {
    Config c = from_toml(toml::parse_file(path));
    const std::filesystem::path obs(c.filter.observations);
    if (!obs.empty() && obs.is_relative()) {
      c.filter.observations = (std::filesystem::path(path).parent_path() / obs).lexically_normal().string();
    }
    return c;
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << path << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw InputError(os.str());
  }
}

// ---------------------------------------------------------------------------
// TOML writing

namespace detail {

inline toml::array to_array(const std::vector<double>& v) {
  toml::array a;
  for (double x : v) a.push_back(x);
  return a;
}

inline toml::table length_table(const LengthSpec& l) {
  toml::table t{{"kind", l.kind}};
  if (l.kind == "exponential") {
    t.insert("rate", l.rate);
    t.insert("offset", l.offset);
  } else if (l.kind == "uniform") {
    t.insert("lo", l.lo);
    t.insert("hi", l.hi);
  } else if (l.kind == "point_mass") {
    t.insert("t", l.t);
  } else if (l.kind == "two_point") {
    t.insert("t1", l.t1);
    t.insert("t2", l.t2);
    t.insert("w1", l.w1);
  } else if (l.kind == "table") {
    t.insert("knots", to_array(l.knots));
    t.insert("values", to_array(l.values));
  } else if (l.kind == "atoms") {
    t.insert("times", to_array(l.times));
    t.insert("weights", to_array(l.weights));
  }
  return t;
}

inline toml::table pin_table(const PinSpec& p) {
  toml::table t{{"kind", p.kind}};
  if (p.kind == "two_point") {
    t.insert("z1", p.z1);
    t.insert("z2", p.z2);
    t.insert("p1", p.p1);
  } else if (p.kind == "discrete") {
    t.insert("points", to_array(p.points));
    t.insert("probs", to_array(p.probs));
  } else if (p.kind == "binomial") {
    t.insert("n", p.n);
    t.insert("p", p.p);
  } else if (p.kind == "gaussian") {
    t.insert("mean", p.mean);
    t.insert("sd", p.sd);
  } else if (p.kind == "uniform") {
    t.insert("lo", p.lo);
    t.insert("hi", p.hi);
  }
  return t;
}

inline std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

}  // namespace detail

/// Tables for every section; parse_string(to_string(c)) reproduces c except
/// for parameters that the chosen law kinds ignore.
inline toml::table to_toml(const Config& c) {
  const auto& z = c.verify.sizes;
  toml::array suites;
  for (const auto& s : c.verify.suites) suites.push_back(s);
  toml::table root{
      {"model", c.model},
      {"seed", static_cast<std::int64_t>(c.seed)},
      {"out_dir", c.out_dir},
      {"length", detail::length_table(c.length)},
      {"pin", detail::pin_table(c.pin)},
      {"grid", toml::table{{"t_max", c.grid.t_max}, {"n_steps", c.grid.n_steps}}},
      {"simulate", toml::table{{"name", c.simulate.name},
                               {"paths", c.simulate.paths},
                               {"method", c.simulate.method},
                               {"until_absorbed", c.simulate.until_absorbed}}},
      {"density", toml::table{{"kind", c.density.kind},
                              {"r", c.density.r},
                              {"z", c.density.z},
                              {"t", c.density.t},
                              {"x", c.density.x},
                              {"u", c.density.u},
                              {"absorbed", c.density.absorbed},
                              {"y_min", c.density.y_min},
                              {"y_max", c.density.y_max},
                              {"points", c.density.points}}},
      {"verify",
       toml::table{{"suites", suites},
                   {"alpha", c.verify.alpha},
                   {"drift_scale", c.verify.drift_scale},
                   {"sizes", toml::table{{"modification_paths", detail::as_int(z.modification_paths)},
                                         {"markov_paths", detail::as_int(z.markov_paths)},
                                         {"non_markov_paths", detail::as_int(z.non_markov_paths)},
                                         {"transition_paths", detail::as_int(z.transition_paths)},
                                         {"posterior_paths", detail::as_int(z.posterior_paths)},
                                         {"posterior_mc_paths", detail::as_int(z.posterior_mc_paths)},
                                         {"drift_draws", detail::as_int(z.drift_draws)},
                                         {"euler_paths", detail::as_int(z.euler_paths)},
                                         {"innovation_paths", detail::as_int(z.innovation_paths)},
                                         {"continuity_steps", detail::as_int(z.continuity_steps)}}}}},
  };
  if (!c.filter.observations.empty()) root.insert("filter", toml::table{{"observations", c.filter.observations}});
  return root;
}

inline std::string to_string(const Config& c) {
  std::ostringstream os;
  os << to_toml(c) << "\n";
  return os.str();
}

/// Copy of c with the parameters its law kinds ignore reset to defaults, the
/// form in which a config survives a write/read cycle.
inline Config canonical(const Config& c) {
  Config out = c;
  const LengthSpec l0;
  const PinSpec p0;
  LengthSpec& l = out.length;
  PinSpec& p = out.pin;
  const std::string lk = l.kind, pk = p.kind;
  LengthSpec lc = l0;
  lc.kind = lk;
  if (lk == "exponential") lc.rate = l.rate, lc.offset = l.offset;
  if (lk == "uniform") lc.lo = l.lo, lc.hi = l.hi;
  if (lk == "point_mass") lc.t = l.t;
  if (lk == "two_point") lc.t1 = l.t1, lc.t2 = l.t2, lc.w1 = l.w1;
  if (lk == "table") lc.knots = l.knots, lc.values = l.values;
  if (lk == "atoms") lc.times = l.times, lc.weights = l.weights;
  PinSpec pc = p0;
  pc.kind = pk;
  if (pk == "two_point") pc.z1 = p.z1, pc.z2 = p.z2, pc.p1 = p.p1;
  if (pk == "discrete") pc.points = p.points, pc.probs = p.probs;
  if (pk == "binomial") pc.n = p.n, pc.p = p.p;
  if (pk == "gaussian") pc.mean = p.mean, pc.sd = p.sd;
  if (pk == "uniform") pc.lo = p.lo, pc.hi = p.hi;
  l = lc;
  p = pc;
  return out;
}

}  // namespace rbb::config
