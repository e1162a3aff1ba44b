#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rbb/cli.hpp"
#include "rbb/config.hpp"

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::int64_t paths = 0;
  std::string suite;
  std::string observations;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "TOML configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", f.out, "Output directory (overrides the config)");
}

rbb::config::Config load(CLI::App& cmd, const Flags& f) {
  rbb::config::Config c = f.config.empty() ? rbb::config::Config{} : rbb::config::parse_file(f.config);
  rbb::cli::Overrides o;
  if (cmd.count("--seed")) o.seed = f.seed;
  if (cmd.count("--out")) o.out_dir = f.out;
  if (cmd.get_option_no_throw("--paths") && cmd.count("--paths")) o.paths = f.paths;
  if (cmd.get_option_no_throw("--suite") && cmd.count("--suite")) o.suite = f.suite;
  if (cmd.get_option_no_throw("--observations") && cmd.count("--observations")) o.observations = f.observations;
  return rbb::cli::apply(std::move(c), o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brownian bridges with random length and pinning point"};
  app.require_subcommand(1);
  Flags f;

  auto* simulate = app.add_subcommand("simulate", "Write simulated paths as CSV (path_id,t,value,absorbed)");
  add_common(simulate, f);
  simulate->add_option("--paths", f.paths, "Number of paths")->check(CLI::PositiveNumber);

  auto* figures = app.add_subcommand("figures", "Write the three canonical path sets and a summary");
  add_common(figures, f);
  figures->add_option("--paths", f.paths, "Paths per set")->check(CLI::PositiveNumber);

  auto* density = app.add_subcommand("density", "Evaluate a marginal or transition density as JSON");
  add_common(density, f);

  auto* filter = app.add_subcommand("filter", "Posterior and drift along observed (t, value) rows");
  add_common(filter, f);
  filter->add_option("--observations", f.observations, "CSV with header t,value[,absorbed]");

  auto* verify = app.add_subcommand("verify", "Run verification suites; exit 1 if any fails");
  add_common(verify, f);
  verify->add_option("--suite", f.suite, "Suite name or 'all'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return rbb::cli::kUsage;
  }

  return rbb::cli::guarded([&] {
    if (*simulate) return rbb::cli::cmd_simulate(load(*simulate, f));
    if (*figures) {
      auto c = load(*figures, f);
      return rbb::cli::cmd_figures(c);
    }
    if (*density) return rbb::cli::cmd_density(load(*density, f));
    if (*filter) return rbb::cli::cmd_filter(load(*filter, f));
    return rbb::cli::cmd_verify(load(*verify, f));
  });
}
