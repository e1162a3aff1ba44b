#pragma once

// Commands behind the `rbb` executable. Each command reads a validated
// Config, writes its files under out_dir and returns a process exit code.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "rbb/config.hpp"
#include "rbb/errors.hpp"
#include "rbb/info_process.hpp"
#include "rbb/parallel.hpp"
#include "rbb/random_bridge.hpp"
#include "rbb/stats.hpp"
#include "rbb/verification.hpp"

namespace rbb::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2 };

/// Command-line flags that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::int64_t> paths;
  std::optional<std::string> suite;
  std::optional<std::string> observations;
};

inline config::Config apply(config::Config c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.paths) c.simulate.paths = *o.paths;
  if (o.suite) c.verify.suites = {*o.suite};
  if (o.observations) c.filter.observations = *o.observations;
  c.validate();
  return c;
}

/// Runs a command, mapping usage and configuration errors to exit code 2.
inline int guarded(const std::function<int()>& command, std::ostream& err = std::cerr) {
  try {
    return command();
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
  } catch (const PreconditionError& e) {
    err << "precondition not met: " << e.what() << "\n";
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
  }
  return kUsage;
}

// ---------------------------------------------------------------------------
// Output helpers

inline std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw InputError("cannot create output directory '" + dir + "'");
  return dir;
}

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot write '" + file.string() + "'");
  os << text;
  if (!os) throw InputError("write failed for '" + file.string() + "'");
}

inline std::string paths_csv(const std::vector<PathSample>& paths) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "path_id,t,value,absorbed\n");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& p = paths[i];
    for (std::size_t k = 0; k < p.grid.size(); ++k) {
      fmt::format_to(std::back_inserter(buf), "{},{:.17g},{:.17g},{}\n", i, p.grid[k], p.values[k],
                     p.absorbed_at(k) ? 1 : 0);
    }
  }
  return fmt::to_string(buf);
}

inline std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// simulate

namespace detail {

/// Euler path, re-run on longer horizons (same random source) until it is absorbed.
inline PathSample euler_until_absorbed(const InfoModel& m, double dt, std::size_t n_steps, std::uint64_t seed,
                                       std::uint64_t id) {
  for (std::size_t n = n_steps;; n *= 2) {
    RngStream src(seed, id);
    auto p = euler_simulate_info(m, uniform_grid(dt * static_cast<double>(n), n), src);
    if (p.absorb_index != PathSample::kBeyondGrid) {
      const std::size_t keep = std::max(n_steps, p.absorb_index) + 1;
      p.grid.resize(keep);
      p.values.resize(keep);
      return p;
    }
    if (n > 1024 * n_steps) throw NumericError("euler path not absorbed within 1024 horizons");
  }
}

}  // namespace detail

/// Paths of the configured model; path i uses stream (seed, i).
inline std::vector<PathSample> simulate_paths(const config::Config& c) {
  c.validate();
  const auto n_paths = static_cast<std::size_t>(c.simulate.paths);
  const auto n_steps = static_cast<std::size_t>(c.grid.n_steps);
  const double dt = c.grid.t_max / static_cast<double>(n_steps);
  const auto grid = c.grid.times();
  const bool euler = c.simulate.method == "euler";
  const RandomBridgeModel rb = c.model == "info" ? c.info_model().as_random_bridge() : c.random_bridge_model();
  std::optional<InfoModel> im;
  if (euler) im = c.info_model();
  auto chunks = parallel_chunks(n_paths, 16, [&](std::size_t b, std::size_t e) {
    std::vector<PathSample> out;
    for (std::size_t i = b; i < e; ++i) {
      if (euler) {
        if (c.simulate.until_absorbed) {
          out.push_back(detail::euler_until_absorbed(*im, dt, n_steps, c.seed, i));
        } else {
          RngStream src(c.seed, i);
          out.push_back(euler_simulate_info(*im, grid, src));
        }
      } else {
        RngStream src(c.seed, i);
        out.push_back(c.simulate.until_absorbed ? sample_random_bridge_until_absorbed(rb, dt, c.grid.t_max, src)
                                                : sample_random_bridge(rb, grid, src));
      }
    }
    return out;
  });
  std::vector<PathSample> paths;
  paths.reserve(n_paths);
  for (auto& ch : chunks) {
    for (auto& p : ch) paths.push_back(std::move(p));
  }
  return paths;
}

inline int cmd_simulate(const config::Config& c, std::ostream& log = std::cout) {
  const auto dir = prepare_out_dir(c.out_dir);
  const auto file = dir / (c.simulate.name + ".csv");
  write_text(file, paths_csv(simulate_paths(c)));
  log << "wrote " << file.string() << " (" << c.simulate.paths << " paths)\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// figures

/// The three canonical path sets: exponential(0.1) length with a
/// binomial(3, 1/2) pin, with a standard normal pin, and the two-level
/// information process with z = (-4, 4), p1 = 0.3.
inline std::vector<config::Config> figure_configs(const config::Config& base) {
  config::Config c;
  c.seed = base.seed;
  c.out_dir = base.out_dir;
  c.grid = {40.0, 4000};
  c.simulate.paths = base.simulate.paths;
  c.simulate.until_absorbed = true;
  c.length.kind = "exponential";
  c.length.rate = 0.1;

  config::Config left = c;
  left.model = "random_bridge";
  left.simulate.name = "fig1_left";
  left.pin.kind = "binomial";
  left.pin.n = 3;
  left.pin.p = 0.5;

  config::Config right = c;
  right.model = "random_bridge";
  right.simulate.name = "fig1_right";
  right.pin.kind = "gaussian";
  right.pin.mean = 0.0;
  right.pin.sd = 1.0;

  config::Config info = c;
  info.model = "info";
  info.simulate.name = "fig2";
  info.pin.kind = "two_point";
  info.pin.z1 = -4.0;
  info.pin.z2 = 4.0;
  info.pin.p1 = 0.3;
  return {left, right, info};
}

/// Frequency of absorption at z2 over n exact paths of the two-level model.
struct AbsorptionFrequency {
  std::size_t paths = 0;
  double z2_frequency = 0.0;
  double stderr_ = 0.0;
  bool all_terminated = true;
};

inline AbsorptionFrequency absorption_frequency(const config::Config& c, std::size_t n) {
  const auto m = c.info_model().as_random_bridge();
  const double dt = c.grid.t_max / static_cast<double>(c.grid.n_steps);
  const std::uint64_t seed = verify::case_seed(c.seed, "figures-absorption");
  struct Acc {
    std::size_t hits = 0;
    bool terminated = true;
  };
  const auto chunks = parallel_chunks(n, 256, [&](std::size_t b, std::size_t e) {
    Acc a;
    for (std::size_t i = b; i < e; ++i) {
      RngStream src(seed, i);
      const auto p = sample_random_bridge_until_absorbed(m, dt, dt, src);
      const double last = p.values.back();
      a.terminated = a.terminated && (last == c.pin.z1 || last == c.pin.z2);
      if (last == c.pin.z2) ++a.hits;
    }
    return a;
  });
  AbsorptionFrequency f;
  f.paths = n;
  std::size_t hits = 0;
  for (const auto& a : chunks) {
    hits += a.hits;
    f.all_terminated = f.all_terminated && a.terminated;
  }
  f.z2_frequency = static_cast<double>(hits) / static_cast<double>(n);
  f.stderr_ = stats::binomial_stderr(1.0 - c.pin.p1, n);
  return f;
}

inline int cmd_figures(const config::Config& base, std::ostream& log = std::cout, std::size_t stat_paths = 10000) {
  const auto dir = prepare_out_dir(base.out_dir);
  nlohmann::ordered_json summary;
  summary["seed"] = base.seed;
  auto& sets = summary["path_sets"];
  const auto cfgs = figure_configs(base);
  for (const auto& c : cfgs) {
    const auto paths = simulate_paths(c);
    const auto file = dir / (c.simulate.name + ".csv");
    write_text(file, paths_csv(paths));
    bool terminated = true;
    for (const auto& p : paths) terminated = terminated && p.values.back() == p.realized_pin;
    nlohmann::ordered_json s;
    s["file"] = file.filename().string();
    s["model"] = c.model;
    s["length"] = fmt::format("exponential(rate={})", c.length.rate);
    s["pin"] = c.pin.kind == "binomial"   ? fmt::format("binomial(n={}, p={})", c.pin.n, c.pin.p)
               : c.pin.kind == "gaussian" ? fmt::format("normal(mean={}, sd={})", c.pin.mean, c.pin.sd)
                                          : fmt::format("two_point(z1={}, z2={}, p1={})", c.pin.z1, c.pin.z2, c.pin.p1);
    s["paths"] = paths.size();
    s["all_paths_end_at_pin"] = terminated;
    sets.push_back(s);
    log << "wrote " << file.string() << " (" << paths.size() << " paths)\n";
  }
  const auto f = absorption_frequency(cfgs[2], stat_paths);
  const double expected = 1.0 - cfgs[2].pin.p1;
  auto& a = summary["absorption_at_z2"];
  a["paths"] = f.paths;
  a["frequency"] = f.z2_frequency;
  a["expected"] = expected;
  a["stderr"] = f.stderr_;
  a["z"] = (f.z2_frequency - expected) / f.stderr_;
  a["within_3_sigma"] = std::abs(f.z2_frequency - expected) <= 3.0 * f.stderr_;
  a["all_terminated"] = f.all_terminated;
  write_text(dir / "figures_summary.json", dump(summary));
  log << fmt::format("absorption at z2: {:.4f} over {} paths (expected {:.4f} +- {:.4f})\n", f.z2_frequency, f.paths,
                     expected, 3.0 * f.stderr_);
  return kOk;
}

// ---------------------------------------------------------------------------
// density

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = n == 1 ? a : a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
  return v;
}

inline nlohmann::ordered_json density_json(const config::Config& c) {
  const auto& d = c.density;
  const auto ys = linspace(d.y_min, d.y_max, static_cast<std::size_t>(d.points));
  nlohmann::ordered_json j;
  j["kind"] = d.kind;
  std::vector<double> values;
  if (d.kind == "marginal") {
    const BridgeSpec b{d.r, d.z};
    j["r"] = d.r;
    j["z"] = d.z;
    j["t"] = d.t;
    for (double y : ys) values.push_back(bridge_marginal_pdf(b, d.t, y));
    j["x"] = ys;
    j["values"] = values;
    return j;
  }
  if (d.kind == "transition") {
    const BridgeSpec b{d.r, d.z};
    j["r"] = d.r;
    j["z"] = d.z;
    j["t"] = d.t;
    j["x"] = d.x;
    j["u"] = d.u;
    for (double y : ys) values.push_back(bridge_transition_pdf(b, d.t, d.x, d.u, y));
    j["y"] = ys;
    j["values"] = values;
    return j;
  }
  const auto m = c.info_model();
  if (d.absorbed && m.pin_index(d.x) < 0) throw DomainError("density: absorbed input must equal z1 or z2");
  const auto k = info_transition(m, d.t, d.x, d.u);
  j["t"] = d.t;
  j["x"] = d.x;
  j["u"] = d.u;
  j["pins"] = {{"z1", m.z1}, {"z2", m.z2}};
  j["absorbed"] = m.pin_index(d.x) >= 0;
  nlohmann::ordered_json atoms = nlohmann::ordered_json::object();
  if (!k.has_lebesgue()) {
    atoms[m.pin_index(d.x) == 0 ? "z1" : "z2"] = 1.0;
    j["atoms"] = atoms;
    j["y"] = nlohmann::ordered_json::array();
    j["values"] = nlohmann::ordered_json::array();
    j["lebesgue_mass"] = 0.0;
    j["total_mass"] = 1.0;
    return j;
  }
  atoms["z1"] = k.atom1;
  atoms["z2"] = k.atom2;
  j["atoms"] = atoms;
  for (double y : ys) values.push_back(k.lebesgue(y));
  j["y"] = ys;
  j["values"] = values;
  const double leb = k.lebesgue_mass();
  j["lebesgue_mass"] = leb;
  j["total_mass"] = k.atom1 + k.atom2 + leb;
  return j;
}

inline int cmd_density(const config::Config& c, std::ostream& log = std::cout) {
  const auto j = density_json(c);
  const auto dir = prepare_out_dir(c.out_dir);
  const auto file = dir / ("density_" + c.density.kind + ".json");
  write_text(file, dump(j));
  log << "wrote " << file.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// filter

struct Observation {
  double t = 0.0;
  double value = 0.0;
  std::optional<bool> absorbed;
};

inline std::vector<Observation> parse_observations(std::istream& is, const std::string& source = "observations") {
  std::string line;
  if (!std::getline(is, line)) throw InputError(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool has_flag = false;
  if (line == "t,value,absorbed") {
    has_flag = true;
  } else if (line != "t,value") {
    throw InputError(source + ": header must be 't,value' or 't,value,absorbed'");
  }
  std::vector<Observation> rows;
  for (std::size_t lineno = 2; std::getline(is, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != (has_flag ? 3u : 2u)) throw InputError(fmt::format("{}:{}: wrong number of fields", source, lineno));
    Observation o;
    try {
      std::size_t used = 0;
      o.t = std::stod(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument("t");
      o.value = std::stod(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("value");
    } catch (const std::exception&) {
      throw InputError(fmt::format("{}:{}: malformed number", source, lineno));
    }
    if (has_flag) {
      if (cells[2] == "1" || cells[2] == "true") {
        o.absorbed = true;
      } else if (cells[2] == "0" || cells[2] == "false") {
        o.absorbed = false;
      } else {
        throw InputError(fmt::format("{}:{}: absorbed must be 0/1/true/false", source, lineno));
      }
    }
    if (!std::isfinite(o.t) || !std::isfinite(o.value) || o.t < 0.0) {
      throw InputError(fmt::format("{}:{}: need finite t >= 0 and a finite value", source, lineno));
    }
    if (!rows.empty() && !(o.t > rows.back().t)) {
      throw InputError(fmt::format("{}:{}: observation times must be strictly increasing", source, lineno));
    }
    rows.push_back(o);
  }
  return rows;
}

struct FilterRow {
  double t = 0.0;
  double value = 0.0;
  bool absorbed = false;
  double prob_absorbed = std::nan("");  // P(tau <= t | observation)
  double prob_z1 = std::nan("");
  double prob_z2 = std::nan("");
  double drift = std::nan("");
  std::string decision = "hold";
  std::string error;
};

/// Posterior and drift per observation; rows the model cannot explain carry
/// an error message instead of numbers.
inline std::vector<FilterRow> filter_rows(const InfoModel& m, const std::vector<Observation>& obs) {
  std::vector<FilterRow> out;
  std::optional<double> pinned;
  for (const auto& o : obs) {
    FilterRow r;
    r.t = o.t;
    r.value = o.value;
    r.absorbed = o.absorbed.value_or(m.pin_index(o.value) >= 0);
    try {
      if (pinned && o.value != *pinned) {
        throw InferenceError(fmt::format("path left the pin {:g} it was absorbed at", *pinned));
      }
      if (o.t == 0.0) {
        if (o.value != 0.0) throw InferenceError("the process starts at 0");
        r.prob_absorbed = m.length.cdf(0.0);
        r.prob_z1 = m.p1;
        r.prob_z2 = 1.0 - m.p1;
      } else {
        const auto table = info_posterior_table(m, o.t, o.value, r.absorbed);
        r.prob_absorbed = table.prob_absorbed();
        r.prob_z1 = table.expectation([&](double, double z) { return z == m.z1 ? 1.0 : 0.0; });
        r.prob_z2 = table.expectation([&](double, double z) { return z == m.z2 ? 1.0 : 0.0; });
      }
      if (r.absorbed) {
        pinned = o.value;
        r.decision = m.pin_index(o.value) == 1 ? "withdraw" : "inject";
      }
      r.drift = info_drift(m, o.t, o.value, r.absorbed);
    } catch (const InferenceError& e) {
      r.error = e.what();
    } catch (const NumericError& e) {
      r.error = e.what();
    }
    out.push_back(r);
  }
  return out;
}

inline nlohmann::ordered_json filter_json(const InfoModel& m, const std::vector<FilterRow>& rows) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
  nlohmann::ordered_json j;
  j["pins"] = {{"z1", m.z1}, {"z2", m.z2}, {"p1", m.p1}};
  auto& arr = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["t"] = r.t;
    o["value"] = r.value;
    o["absorbed"] = r.absorbed;
    o["p_tau_le_t"] = num(r.prob_absorbed);
    o["p_z1"] = num(r.prob_z1);
    o["p_z2"] = num(r.prob_z2);
    o["drift"] = num(r.drift);
    o["decision"] = r.decision;
    o["error"] = r.error.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.error);
    arr.push_back(o);
  }
  return j;
}

inline int cmd_filter(const config::Config& c, std::ostream& log = std::cout) {
  if (c.filter.observations.empty()) throw InputError("filter: no observations file (use --observations)");
  std::ifstream is(c.filter.observations);
  if (!is) throw InputError("cannot read '" + c.filter.observations + "'");
  const auto m = c.info_model();
  const auto rows = filter_rows(m, parse_observations(is, c.filter.observations));
  const auto dir = prepare_out_dir(c.out_dir);
  const auto file = dir / "filter.json";
  write_text(file, dump(filter_json(m, rows)));
  std::size_t errors = 0;
  for (const auto& r : rows) errors += r.error.empty() ? 0 : 1;
  log << "wrote " << file.string() << " (" << rows.size() << " rows, " << errors << " with errors)\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// verify

inline std::vector<std::string> resolve_suites(const std::vector<std::string>& requested) {
  std::vector<std::string> out;
  for (const auto& s : requested) {
    if (s == "all") {
      out.push_back("bridge_equivalence");
      for (const auto& n : verify::suite_names()) out.push_back(n);
      continue;
    }
    const auto& names = verify::suite_names();
    if (s != "bridge_equivalence" && std::find(names.begin(), names.end(), s) == names.end()) {
      throw InputError("unknown suite '" + s + "'");
    }
    out.push_back(s);
  }
  return out;
}

inline int cmd_verify(const config::Config& c, std::ostream& log = std::cout) {
  const auto suites = resolve_suites(c.verify.suites);
  const auto dir = prepare_out_dir(c.out_dir);
  const auto sc = c.suite_config();
  bool ok = true;
  for (const auto& name : suites) {
    const auto rep = verify::run_suite(name, sc);
    write_text(dir / ("verify_" + name + ".json"), dump(verify::to_json(rep)));
    std::size_t failed = 0;
    for (const auto& cs : rep.cases) failed += cs.pass ? 0 : 1;
    log << fmt::format("{:<24} {}  {}/{} cases passed  {:.1f}s\n", name, rep.passed() ? "PASS" : "FAIL",
                       rep.cases.size() - failed, rep.cases.size(), rep.runtime);
    for (const auto& cs : rep.cases) {
      if (!cs.pass) {
        log << fmt::format("    failed: {}  estimate={:.6g} reference={:.6g} z={:.3g}\n", cs.name, cs.estimate,
                           cs.reference, cs.z);
      }
    }
    ok = ok && rep.passed();
  }
  return ok ? kOk : kVerifyFailed;
}

}  // namespace rbb::cli
