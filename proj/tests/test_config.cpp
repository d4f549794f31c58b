// SPDX-License-Identifier: Apache-2.0
#include "invprob/config.hpp"
#include "invprob/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace invprob;

namespace {

const char* kToml = R"(model = "white-noise"
estimator = "delta-net"
ns = [100, 1000, 10000, 100000]
reps = 40
master_seed = 9

[operator]
kind = "convolution"
q = 0.5
singular_values = ["1:0.9", "2s:0.6"]

[class]
family = "trig"
d = 1
s = 1.5
L = 2.0

[truth]
kind = "coefficients"
coefficients = ["1:0.2", "3:-0.05"]

[estimator_params]
delta = 0.3

[bounds]
xi = 0.3
C_tau = 40.0
)";

long config_error_line(const std::string& text)
{
  try {
    parse_config_toml(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

} // namespace

TEST(Config, DefaultsAreValid)
{
  ExperimentConfig c;
  EXPECT_NO_THROW(validate_config(c));
  EXPECT_EQ(parse_config_toml(""), c);
}

TEST(Config, ParsesAllSections)
{
  const auto c = parse_config_toml(kToml);
  EXPECT_EQ(c.estimator, "delta-net");
  EXPECT_EQ(c.ns.size(), 4u);
  EXPECT_EQ(c.reps, 40u);
  EXPECT_EQ(c.master_seed, 9u);
  EXPECT_EQ(c.q, 0.5);
  EXPECT_EQ(c.singular_overrides.at("2s"), 0.6);
  EXPECT_EQ(c.s, 1.5);
  EXPECT_EQ(c.radius, 2.0);
  EXPECT_EQ(c.truth, "coefficients");
  EXPECT_EQ(c.truth_coefficients.at("3"), -0.05);
  EXPECT_EQ(c.delta, 0.3);
  EXPECT_EQ(c.xi, 0.3);
  EXPECT_EQ(c.c_tau, 40.0);
}

TEST(Config, JsonMirrorsToml)
{
  const auto c = parse_config_toml(kToml);
  const auto j = config_to_json(c);
  EXPECT_EQ(parse_config_json(j.dump(2)), c);
}

TEST(Config, ErrorsCarryLineNumbers)
{
  EXPECT_EQ(config_error_line("model = \"white-noise\"\nestimator = \"magic\"\n"), 2);
  EXPECT_EQ(config_error_line("reps = 5\n[class]\ns = \"two\"\n"), 3);
  EXPECT_EQ(config_error_line("reps = 5\nns = [1, 2,, 3]\n"), 2);
  EXPECT_EQ(config_error_line("[operator]\nsingular_values = [\"1=0.5\"]\n"), 2);
  try {
    parse_config_json("{\n  \"reps\": 5,\n  \"model\": \n}");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 4);
  }
}

TEST(Config, RejectsInconsistentCombinations)
{
  EXPECT_THROW(parse_config_toml("model = \"tomography\"\n"), ConfigError);
  EXPECT_THROW(parse_config_toml("model = \"density\"\n"), ConfigError);
  EXPECT_THROW(parse_config_toml("estimator = \"additive\"\n"), ConfigError);
  EXPECT_THROW(parse_config_toml("[operator]\nkind = \"tomography2d\"\n"), ConfigError);
  EXPECT_THROW(parse_config_toml("[class]\nC1 = 2.0\nC2 = 1.0\n"), ConfigError);
  EXPECT_THROW(parse_config_toml("reps = -3\n"), ConfigError);
  EXPECT_THROW(parse_config_toml("ns = []\n"), ConfigError);
  EXPECT_THROW(parse_config_toml("[operator]\nkind = \"radon2d\"\n[class]\nd = 3\n"), ConfigError);
  EXPECT_NO_THROW(parse_config_toml("[operator]\nkind = \"radon2d\"\n[class]\nd = 2\n"));
}

TEST(Config, LoadDetectsFormat)
{
  const auto dir = std::filesystem::temp_directory_path() / "invprob_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "a.toml") << kToml;
    std::ofstream(dir / "b.json") << config_to_json(parse_config_toml(kToml)).dump();
  }
  EXPECT_EQ(load_config((dir / "a.toml").string()), load_config((dir / "b.json").string()));
  EXPECT_THROW(load_config((dir / "missing.toml").string()), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Problem, BuildsFromConfig)
{
  const auto p = build_problem(parse_config_toml(kToml));
  EXPECT_EQ(p.op.singular_value(parse_index("1")), 0.9);
  EXPECT_EQ(p.truth.theta.get(parse_index("1")), 0.2);
  EXPECT_NEAR(p.target_exponent(), -3.0 / 5.0, 1e-15);
  EXPECT_EQ(p.delta_for(1000.0), 0.3);
  auto c = parse_config_toml(kToml);
  c.delta = 0.0;
  EXPECT_NEAR(build_problem(c).delta_for(1000.0), std::pow(1000.0, -1.5 / 5.0), 1e-15);
  c.truth_coefficients["1"] = 5.0; // outside the ball
  EXPECT_THROW(build_problem(c), ConfigError);
}

TEST(Problem, ExampleConfigsLoad)
{
  const std::filesystem::path dir = INVPROB_CONFIG_DIR;
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    SCOPED_TRACE(entry.path().string());
    EXPECT_NO_THROW(build_problem(load_config(entry.path().string())));
    ++seen;
  }
  EXPECT_GE(seen, 5u);
}
