// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/config.hpp"
#include "invprob/ellipsoid.hpp"
#include "invprob/estimators.hpp"
#include "invprob/models.hpp"
#include "invprob/net.hpp"
#include "invprob/operators.hpp"
#include "invprob/packing.hpp"
#include "invprob/risk.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace invprob {

/// Everything a run needs, built and validated from a config.
struct Problem
{
  ExperimentConfig config;
  Ellipsoid ellipsoid;
  SvdOperator op;
  TruthSpec truth;
  std::optional<AdditiveSpec> additive;
  std::vector<TruthSpec> component_truths;

  bool density() const { return config.model != "white-noise"; }

  /// Effective dimension of the index set in the rate formulas.
  int index_dim() const
  {
    if (op.kind() != OperatorKind::convolution) return 2;
    return op.family() == BasisFamily::cosine ? 1 : op.dim();
  }

  double target_exponent() const
  {
    if (additive) {
      double t = -std::numeric_limits<double>::infinity();
      for (const auto& c : config.components)
        t = std::max(t, rate_exponent(c.s, c.q, 1.0));
      return t;
    }
    return rate_exponent(ellipsoid.s(), op.q(), index_dim());
  }

  double delta_for(double n) const
  {
    if (config.delta > 0.0) return config.delta;
    return matched_delta(n, ellipsoid.s(), op.q(), index_dim());
  }
};

inline std::map<MultiIndex, double> parse_index_map(const std::map<std::string, double>& m)
{
  std::map<MultiIndex, double> out;
  for (const auto& [k, v] : m)
    out[parse_index(k)] = v;
  return out;
}

inline Problem build_problem(const ExperimentConfig& c)
{
  validate_config(c);
  Problem p;
  p.config = c;
  const auto kind = operator_kind_from_string(c.op_kind);
  try {
    if (kind == OperatorKind::convolution) {
      SvdOperator::Params op;
      op.kind = kind;
      op.family = c.estimator == "additive" ? BasisFamily::trig : basis_family_from_string(c.family);
      op.dim = c.d;
      op.q = c.q;
      op.c = c.op_c;
      op.overrides = parse_index_map(c.singular_overrides);
      if (!op.overrides.empty()) {
        // overrides widen the envelope to the values supplied
        double lo = op.c, hi = op.c;
        for (const auto& [idx, b] : op.overrides) {
          const double base = std::pow(static_cast<double>(std::max(idx.order(), 1)), -c.q);
          lo = std::min(lo, b / base);
          hi = std::max(hi, b / base);
        }
        op.env_lo = lo;
        op.env_hi = hi;
      }
      p.op = SvdOperator(std::move(op));
    } else {
      SvdOperator::Params op;
      op.kind = kind;
      op.overrides = parse_index_map(c.singular_overrides);
      p.op = SvdOperator(std::move(op));
    }
    Ellipsoid::Params ep;
    ep.family = p.op.family();
    ep.dim = p.op.dim();
    ep.s = c.s;
    ep.radius = c.radius;
    ep.c1 = c.c1;
    ep.c2 = c.c2;
    p.ellipsoid = Ellipsoid(ep);

    if (c.estimator == "additive") {
      AdditiveSpec spec;
      spec.dim = c.d;
      spec.c = c.additive_c;
      p.truth.ellipsoid = p.ellipsoid;
      p.truth.theta = CoefficientVector(BasisFamily::trig);
      p.truth.theta.set(spec.constant_index(), 0.0);
      for (const auto& cc : c.components) {
        AdditiveComponent comp;
        comp.ellipsoid = Ellipsoid::sobolev(BasisFamily::cosine, 1, cc.s, cc.radius, cc.c);
        comp.op = SvdOperator::convolution(1, cc.q, 1.0, BasisFamily::cosine);
        comp.axis = cc.axis;
        spec.components.push_back(comp);
        auto t = default_decaying_truth(comp.ellipsoid, c.truth_support, c.truth_fill, c.truth_tau);
        for (const auto& [idx, v] : t.theta.entries())
          p.truth.theta.set(spec.embed(idx, cc.axis), v);
        p.component_truths.push_back(std::move(t));
      }
      spec.validate();
      p.additive = spec;
      return p;
    }

    if (c.truth == "decaying") {
      p.truth = default_decaying_truth(p.ellipsoid, c.truth_support, c.truth_fill, c.truth_tau);
    } else if (c.truth == "density") {
      p.truth = default_density_truth(p.ellipsoid, p.op, c.truth_amplitude);
    } else {
      p.truth.ellipsoid = p.ellipsoid;
      p.truth.theta = CoefficientVector(p.op.family());
      for (const auto& [idx, v] : parse_index_map(c.truth_coefficients))
        p.truth.theta.set(idx, v);
      // margin for user-supplied densities: half the mean level
      p.truth.positivity_margin = 0.5 / p.op.image_measure_total();
    }
    validate_truth(p.truth, p.op, p.density());
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

/// One replication's estimate for sample size n.
class ReplicationRunner
{
public:
  ReplicationRunner(const Problem& p, double n)
    : p_(p)
    , n_(n)
  {
    const auto& c = p.config;
    if (p.additive) {
      std::vector<int> levels;
      for (std::size_t k = 0; k < p.additive->components.size(); ++k) {
        const auto& cc = c.components[k];
        const double dk = c.delta > 0.0 ? c.delta : matched_delta(n, cc.s, cc.q, 1.0);
        nets_.push_back(LatticeNet::build(p.additive->components[k].ellipsoid, dk, 1));
        deltas_.push_back(dk);
        levels.push_back(std::max(nets_.back().truncation_level(), p.component_truths[k].theta.max_order()));
      }
      coords_ = p.additive->joint_coords(levels);
      for (const auto& idx : coords_)
        inv_b_.push_back(p.additive->inverse_singular_value(idx));
      return;
    }
    const int truth_order = p.truth.theta.max_order();
    if (c.estimator == "dense") {
      level_ = truncation_level(p.ellipsoid, c.truncation_delta);
      delta_ = c.truncation_delta;
    } else {
      delta_ = p.delta_for(n);
      net_ = LatticeNet::build(p.ellipsoid, delta_);
      level_ = net_->truncation_level();
    }
    coords_ = p.ellipsoid.coordinates(std::max(level_, truth_order));
    est_coords_ = p.ellipsoid.coordinates(level_);
    for (const auto& idx : coords_)
      inv_b_.push_back(p.op.inverse_singular_value(idx));
  }

  double delta() const { return delta_; }
  const std::optional<LatticeNet>& net() const { return net_; }
  const std::vector<LatticeNet>& component_nets() const { return nets_; }
  const std::vector<double>& component_deltas() const { return deltas_; }

  CoefficientVector estimate(std::uint64_t seed) const
  {
    if (p_.additive) {
      const auto obs = simulate_white_noise(p_.truth.theta, coords_, inv_b_, n_, seed);
      return additive_minimize(*p_.additive, nets_, obs).estimate;
    }
    if (!p_.density()) {
      const auto obs = simulate_white_noise(p_.truth.theta, coords_, inv_b_, n_, seed);
      if (net_) return delta_net_minimize(*net_, obs).estimate;
      return dense_minimize(p_.ellipsoid, obs, level_).estimate;
    }
    const auto sample = sample_density(p_.truth, p_.op, static_cast<std::size_t>(n_), seed);
    if (net_) return delta_net_minimize(*net_, sample, p_.op).estimate;
    return dense_minimize(p_.ellipsoid, sample, p_.op, level_).estimate;
  }

private:
  const Problem& p_;
  double n_;
  double delta_ = 0.0;
  int level_ = 0;
  std::optional<LatticeNet> net_;
  std::vector<LatticeNet> nets_;
  std::vector<double> deltas_;
  std::vector<MultiIndex> coords_;
  std::vector<MultiIndex> est_coords_;
  std::vector<double> inv_b_;
};

struct RateRow
{
  double n = 0.0;
  double mise = 0.0;
  double stderr_ = 0.0;
  double delta = 0.0;
  double log_card_lower = 0.0;
  double log_card_upper = 0.0;
  double rho = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();
};

struct RateReport
{
  std::vector<RateRow> rows;
  RateFit fit;
  bool fitted = false;
};

/// MISE over the config's n grid. Oracle risk bounds are attached for delta-net runs.
inline RateReport run_rates(const Problem& p, unsigned threads = 1, bool need_fit = true)
{
  const auto& c = p.config;
  if (c.reps < 2) throw ConfigError("reps must be at least 2 for a rate experiment (standard errors need replication)");
  RateReport rep;
  std::optional<RiskBoundConstants> k;
  if (c.estimator == "delta-net" && !p.density())
    k = RiskBoundConstants::make(c.xi, c.c_tau, ObservationMode::white_noise);
  for (std::size_t i = 0; i < c.ns.size(); ++i) {
    const double n = c.ns[i];
    const ReplicationRunner runner(p, n);
    RateRow row;
    row.n = n;
    row.delta = runner.delta();
    if (runner.net()) {
      const auto lc = runner.net()->log_cardinality();
      row.log_card_lower = lc.lower;
      row.log_card_upper = lc.upper;
      row.rho = rho_Q(p.op, *runner.net()).value;
      if (k) row.bound = oracle_risk_bound(*k, row.delta, lc.lower, row.rho, n);
    }
    const auto m = mise_monte_carlo(
      p.truth.theta, [&](std::size_t, std::uint64_t seed) { return runner.estimate(seed); }, c.reps,
      derive_seed(c.master_seed, 1000003ULL * (i + 1)), threads);
    row.mise = m.mean;
    row.stderr_ = m.stderr_;
    rep.rows.push_back(row);
  }
  if (need_fit) {
    RateExperiment x;
    for (const auto& r : rep.rows) {
      x.ns.push_back(r.n);
      x.mises.push_back(r.mise);
      x.stderrs.push_back(r.stderr_);
    }
    x.reps = c.reps;
    x.target_exponent = p.target_exponent();
    rep.fit = rate_regression(x);
    rep.fitted = true;
  }
  return rep;
}

struct NetStatsRow
{
  double delta = 0.0;
  int level = 0;
  std::size_t coords = 0;
  double log_card_lower = 0.0;
  double log_card_upper = 0.0;
  double rho_q = 0.0;
  double rho_k = std::numeric_limits<double>::quiet_NaN();
  std::size_t packing_size = 0;
};

struct NetStatsReport
{
  std::vector<NetStatsRow> rows;
  double cardinality_slope = std::numeric_limits<double>::quiet_NaN();
  double cardinality_target = 0.0;
  double rho_slope = std::numeric_limits<double>::quiet_NaN();
  double rho_target = 0.0;
};

/// Least-squares slope of log y on log(1/x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y)
{
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(1.0 / x[i]));
      ly.push_back(std::log(y[i]));
    }
  detail::require(lx.size() >= 2, "loglog_slope: need two finite points");
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxy / sxx;
}

inline NetStatsReport run_net_stats(const Problem& p)
{
  NetStatsReport rep;
  std::vector<double> ds, lcs, rhos;
  for (double d : p.config.deltas) {
    const auto net = LatticeNet::build(p.ellipsoid, d);
    NetStatsRow row;
    row.delta = d;
    row.level = net.truncation_level();
    row.coords = net.dimension();
    const auto lc = net.log_cardinality();
    row.log_card_lower = lc.lower;
    row.log_card_upper = lc.upper;
    row.rho_q = rho_Q(p.op, net).value;
    try {
      const auto pack = build_packing_set(p.ellipsoid, d, CoefficientVector(p.ellipsoid.family()));
      if (pack.size() >= 2) {
        row.rho_k = rho_K_whitenoise(p.op, pack);
        row.packing_size = pack.size();
      }
    } catch (const InvalidArgument&) {
      // shell empty at this delta: no packing, rho_K stays NaN
    }
    ds.push_back(d);
    lcs.push_back(lc.estimate());
    rhos.push_back(row.rho_q);
    rep.rows.push_back(row);
  }
  rep.cardinality_target = p.index_dim() / p.ellipsoid.s();
  rep.rho_target = p.op.q() / p.ellipsoid.s();
  if (ds.size() >= 2) {
    rep.cardinality_slope = net_cardinality_exponent(p.ellipsoid, ds).slope;
    rep.rho_slope = loglog_slope(ds, rhos);
  }
  return rep;
}

} // namespace invprob
