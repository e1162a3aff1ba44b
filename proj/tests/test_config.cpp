#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rbb/cli.hpp"
#include "rbb/config.hpp"
#include "rbb/errors.hpp"

namespace {

using namespace rbb;
namespace fs = std::filesystem;

const fs::path kConfigs = fs::path(RBB_SOURCE_DIR) / "configs";

std::vector<config::LengthSpec> length_specs() {
  std::vector<config::LengthSpec> out(6);
  out[0].kind = "exponential", out[0].rate = 0.25, out[0].offset = 0.5;
  out[1].kind = "uniform", out[1].lo = 0.5, out[1].hi = 3.0;
  out[2].kind = "point_mass", out[2].t = 2.5;
  out[3].kind = "two_point", out[3].t1 = 1.0, out[3].t2 = 4.0, out[3].w1 = 0.3;
  out[4].kind = "table", out[4].knots = {0.5, 1.0, 4.0}, out[4].values = {0.0, 2.0, 0.0};
  out[5].kind = "atoms", out[5].times = {0.5, 1.5}, out[5].weights = {0.25, 0.75};
  return out;
}

std::vector<config::PinSpec> pin_specs() {
  std::vector<config::PinSpec> out(5);
  out[0].kind = "two_point", out[0].z1 = -4.0, out[0].z2 = 4.0, out[0].p1 = 0.3;
  out[1].kind = "discrete", out[1].points = {-1.0, 0.0, 2.0}, out[1].probs = {0.2, 0.5, 0.3};
  out[2].kind = "binomial", out[2].n = 3, out[2].p = 0.5;
  out[3].kind = "gaussian", out[3].mean = 0.2, out[3].sd = 1.5;
  out[4].kind = "uniform", out[4].lo = -1.0, out[4].hi = 2.0;
  return out;
}

TEST(Config, RoundTripsEveryLawKind) {
  for (const auto& l : length_specs()) {
    for (const auto& p : pin_specs()) {
      config::Config c;
      c.model = p.kind == "two_point" ? "info" : "random_bridge";
      c.seed = 99;
      c.length = l;
      c.pin = p;
      c.grid = {12.5, 250};
      c.simulate.until_absorbed = true;
      c.density.kind = "transition";
      c.filter.observations = "obs.csv";
      c.verify.suites = {"drift", "innovation"};
      c.verify.sizes.drift_draws = 1234;
      const auto back = config::parse_string(config::to_string(c));
      EXPECT_EQ(back, config::canonical(c)) << l.kind << "/" << p.kind;
    }
  }
}

TEST(Config, DefaultsWhenSectionsAreMissing) {
  const auto c = config::parse_string("seed = 5\n");
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.model, "info");
  EXPECT_EQ(c.grid, config::GridSpec{});
}

TEST(Config, RejectsUnknownKeys) {
  try {
    config::parse_string("seeds = 3\n");
    FAIL() << "no error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown key 'seeds'"), std::string::npos) << e.what();
  }
  EXPECT_THROW(config::parse_string("[length]\nkind = \"exponential\"\nlambda = 0.1\n"), InputError);
  EXPECT_THROW(config::parse_string("[verify.sizes]\ndrift = 10\n"), InputError);
  EXPECT_THROW(config::parse_string("[plots]\nx = 1\n"), InputError);
}

TEST(Config, RejectsInvalidValues) {
  EXPECT_THROW(config::parse_string("[grid]\nn_steps = 0\n"), InputError);
  EXPECT_THROW(config::parse_string("[grid]\nt_max = -1.0\n"), InputError);
  EXPECT_THROW(config::parse_string("[length]\nrate = \"fast\"\n"), InputError);
  EXPECT_THROW(config::parse_string("[pin]\nkind = \"two_point\"\np1 = 1.5\n"), InputError);
  EXPECT_THROW(config::parse_string("model = \"info\"\n[pin]\nkind = \"gaussian\"\n"), InputError);
  EXPECT_THROW(config::parse_string("model = \"other\"\n"), InputError);
  EXPECT_THROW(config::parse_string("model = \"random_bridge\"\n[simulate]\nmethod = \"euler\"\n"), InputError);
  EXPECT_THROW(config::parse_string("[simulate]\npaths = 0\n"), InputError);
}

TEST(Config, SyntaxErrorsCarryLocation) {
  try {
    config::parse_string("seed = 1\n[grid\n", "broken.toml");
    FAIL() << "no error";
  } catch (const InputError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("broken.toml:2:", 0), 0u) << e.what();
  }
}

TEST(Config, ShippedConfigsParse) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".toml") continue;
    EXPECT_NO_THROW(config::parse_file(entry.path().string())) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 5u);
}

TEST(Config, FigureConfigsMatchShippedFiles) {
  const auto figs = cli::figure_configs(config::Config{});
  ASSERT_EQ(figs.size(), 3u);
  for (const auto& f : figs) {
    const auto shipped = config::parse_file((kConfigs / (f.simulate.name + ".toml")).string());
    EXPECT_EQ(config::canonical(shipped), config::canonical(f)) << f.simulate.name;
  }
}

TEST(Config, ObservationPathIsRelativeToFile) {
  const auto c = config::parse_file((kConfigs / "filter.toml").string());
  EXPECT_TRUE(fs::exists(c.filter.observations)) << c.filter.observations;
}

TEST(Config, ModelsFromSpecs) {
  auto c = config::parse_file((kConfigs / "fig2.toml").string());
  const auto m = c.info_model();
  EXPECT_EQ(m.z1, -4.0);
  EXPECT_EQ(m.z2, 4.0);
  EXPECT_EQ(m.p1, 0.3);
  EXPECT_NEAR(m.length.cdf(10.0), 1.0 - std::exp(-1.0), 1e-12);
  const auto s = c.suite_config();
  EXPECT_EQ(s.seed, c.seed);
  EXPECT_EQ(s.config_hash, s.hash());
}

}  // namespace
