// SPDX-License-Identifier: Apache-2.0
// Command-line runner: simulate, estimate, rates, net-stats, bound-check.

#include "invprob/invprob.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace invprob;

namespace {

enum ExitCode
{
  kOk = 0,
  kConfig = 2,
  kResource = 3,
  kNumerical = 4
};

struct Options
{
  std::string config;
  unsigned threads = default_threads();
  std::optional<std::uint64_t> seed;
  std::string out;
};

std::ofstream open_out(const fs::path& p)
{
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

void write_summary(const fs::path& dir, const nlohmann::json& j)
{
  auto os = open_out(dir / "summary.json");
  os << j.dump(2) << '\n';
}

nlohmann::json maybe(double v)
{
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

int cmd_simulate(const Problem& p, const fs::path& out)
{
  const auto& c = p.config;
  if (p.additive) throw ConfigError("simulate: use the estimate subcommand for additive configurations");
  const double n = c.ns.front();
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t r = 0; r < c.reps; ++r) {
    const auto seed = derive_seed(c.master_seed, r);
    const auto name = "observation_" + std::to_string(r) + ".csv";
    auto os = open_out(out / name);
    if (p.density()) {
      const auto s = sample_density(p.truth, p.op, static_cast<std::size_t>(n), seed);
      write_sample_csv(os, s, p.op.kind() != OperatorKind::convolution);
    } else {
      const int level = std::max(truncation_level(p.ellipsoid, c.truncation_delta), p.truth.theta.max_order());
      const auto coords = p.ellipsoid.coordinates(level);
      const auto obs = simulate_white_noise(p.truth, p.op, coords, n, seed);
      write_white_noise_csv(os, obs);
    }
    files.push_back(name);
  }
  write_summary(out, {{"command", "simulate"}, {"n", n}, {"files", files}, {"config", config_to_json(c)}});
  return kOk;
}

int cmd_estimate(const Problem& p, const fs::path& out)
{
  const auto& c = p.config;
  const double n = c.ns.front();
  const auto seed = derive_seed(c.master_seed, 0);
  const auto t0 = std::chrono::steady_clock::now();
  EstimateResult res;
  double delta = 0.0;
  int level = 0;
  if (p.additive) {
    const ReplicationRunner runner(p, n);
    std::vector<int> levels;
    for (std::size_t k = 0; k < runner.component_nets().size(); ++k)
      levels.push_back(std::max(runner.component_nets()[k].truncation_level(), p.component_truths[k].theta.max_order()));
    const auto coords = p.additive->joint_coords(levels);
    std::vector<double> inv_b;
    for (const auto& idx : coords)
      inv_b.push_back(p.additive->inverse_singular_value(idx));
    const auto obs = simulate_white_noise(p.truth.theta, coords, inv_b, n, seed);
    res = additive_minimize(*p.additive, runner.component_nets(), obs);
    for (double d : runner.component_deltas())
      delta += d;
  } else if (c.estimator == "dense") {
    level = truncation_level(p.ellipsoid, c.truncation_delta);
    delta = c.truncation_delta;
    const auto coords = p.ellipsoid.coordinates(std::max(level, p.truth.theta.max_order()));
    if (p.density()) {
      const auto s = sample_density(p.truth, p.op, static_cast<std::size_t>(n), seed);
      res = dense_minimize(p.ellipsoid, s, p.op, level);
    } else {
      res = dense_minimize(p.ellipsoid, simulate_white_noise(p.truth, p.op, coords, n, seed), level);
    }
  } else {
    delta = p.delta_for(n);
    const auto net = LatticeNet::build(p.ellipsoid, delta);
    level = net.truncation_level();
    const auto coords = p.ellipsoid.coordinates(std::max(level, p.truth.theta.max_order()));
    if (p.density()) {
      const auto s = sample_density(p.truth, p.op, static_cast<std::size_t>(n), seed);
      res = delta_net_minimize(net, s, p.op);
    } else {
      res = delta_net_minimize(net, simulate_white_noise(p.truth, p.op, coords, n, seed));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    auto os = open_out(out / "estimate.txt");
    write_estimate(os, res.estimate, delta, level);
  }
  {
    auto os = open_out(out / "estimate.csv");
    os << "index,theta\n";
    for (const auto& [idx, v] : res.estimate.entries())
      os << format_index(idx) << ',' << format_double(v) << '\n';
  }
  write_summary(out, {{"command", "estimate"},
                      {"n", n},
                      {"risk_value", res.risk_value},
                      {"lagrange_multiplier", res.lagrange_multiplier},
                      {"ties_broken", res.ties_broken},
                      {"search_nodes", res.nodes},
                      {"squared_error", distance_sq(res.estimate, p.truth.theta)},
                      {"seconds", secs},
                      {"config", config_to_json(c)}});
  return kOk;
}

nlohmann::json rate_rows_json(const RateReport& rep)
{
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"n", r.n},
                    {"mise", r.mise},
                    {"stderr", r.stderr_},
                    {"delta", r.delta},
                    {"log_card_lower", r.log_card_lower},
                    {"log_card_upper", r.log_card_upper},
                    {"rho", r.rho},
                    {"bound", maybe(r.bound)}});
  return rows;
}

void write_rate_table(const fs::path& out, const RateReport& rep)
{
  std::vector<double> ns, ms, ss;
  for (const auto& r : rep.rows) {
    ns.push_back(r.n);
    ms.push_back(r.mise);
    ss.push_back(r.stderr_);
  }
  auto os = open_out(out / "rates.csv");
  write_rate_csv(os, ns, ms, ss);
}

int cmd_rates(const Problem& p, const fs::path& out, unsigned threads)
{
  const auto rep = run_rates(p, threads);
  write_rate_table(out, rep);
  const double tol = p.additive ? 0.2 : (p.op.kind() == OperatorKind::convolution ? 0.15 : 0.2);
  const bool pass = std::abs(rep.fit.slope - rep.fit.target) <= tol;
  write_summary(out, {{"command", "rates"},
                      {"fitted_slope", rep.fit.slope},
                      {"slope_stderr", rep.fit.slope_stderr},
                      {"target", rep.fit.target},
                      {"tolerance", tol},
                      {"pass", pass},
                      {"rows", rate_rows_json(rep)},
                      {"config", config_to_json(p.config)}});
  return kOk;
}

int cmd_bound_check(const Problem& p, const fs::path& out, unsigned threads)
{
  if (p.config.estimator != "delta-net" || p.density())
    throw ConfigError("bound-check needs the white-noise model with the delta-net estimator");
  const auto rep = run_rates(p, threads, false);
  write_rate_table(out, rep);
  bool pass = true;
  for (const auto& r : rep.rows)
    pass = pass && r.mise <= r.bound + 3.0 * r.stderr_;
  write_summary(out, {{"command", "bound-check"},
                      {"xi", p.config.xi},
                      {"C_tau", p.config.c_tau},
                      {"pass", pass},
                      {"rows", rate_rows_json(rep)},
                      {"config", config_to_json(p.config)}});
  return kOk;
}

int cmd_net_stats(const Problem& p, const fs::path& out)
{
  const auto rep = run_net_stats(p);
  {
    auto os = open_out(out / "net_stats.csv");
    os << "delta,M,coords,log_card_lower,log_card_upper,rho_q,rho_k,packing_size\n";
    for (const auto& r : rep.rows)
      os << format_double(r.delta) << ',' << r.level << ',' << r.coords << ',' << format_double(r.log_card_lower) << ','
         << format_double(r.log_card_upper) << ',' << format_double(r.rho_q) << ',' << format_double(r.rho_k) << ','
         << r.packing_size << '\n';
  }
  write_summary(out, {{"command", "net-stats"},
                      {"cardinality_exponent", maybe(rep.cardinality_slope)},
                      {"cardinality_target", rep.cardinality_target},
                      {"rho_exponent", maybe(rep.rho_slope)},
                      {"rho_target", rep.rho_target},
                      {"config", config_to_json(p.config)}});
  return kOk;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Simulation and estimation for statistical inverse problems"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "experiment config (TOML or JSON)")->required();
    sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", opt.out, "output directory (overrides the config)");
  };
  const std::vector<std::string> names = {"simulate", "estimate", "rates", "net-stats", "bound-check"};
  for (const auto& n : names)
    add_common(app.add_subcommand(n, n));
  CLI11_PARSE(app, argc, argv);
  const auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) opt.seed = seed;

  try {
    auto cfg = load_config(opt.config);
    if (opt.seed) cfg.master_seed = *opt.seed;
    if (!opt.out.empty()) cfg.output_dir = opt.out;
    const auto problem = build_problem(cfg);
    const fs::path out = cfg.output_dir;
    fs::create_directories(out);
    const auto name = sub->get_name();
    if (name == "simulate") return cmd_simulate(problem, out);
    if (name == "estimate") return cmd_estimate(problem, out);
    if (name == "rates") return cmd_rates(problem, out, opt.threads);
    if (name == "net-stats") return cmd_net_stats(problem, out);
    return cmd_bound_check(problem, out, opt.threads);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return kResource;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
