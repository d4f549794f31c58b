// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/coefficients.hpp"
#include "invprob/ellipsoid.hpp"
#include "invprob/errors.hpp"
#include "invprob/multi_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace invprob {

/// Certified bounds on the natural log of a net's cardinality.
struct LogCardinality
{
  double lower = 0.0;
  double upper = 0.0;
  bool exact = false;

  double estimate() const { return exact ? lower : 0.5 * (lower + upper); }
};

/// Result of an exact nearest-point search over a lattice net.
struct NearestResult
{
  std::vector<double> theta;
  double risk = 0.0;       ///< quadratic_risk(theta, target)
  std::size_t ties = 1;    ///< net points attaining the minimum
  std::size_t nodes = 0;   ///< search nodes visited
};

/// Materialized delta-net: `size()` points over a common coordinate list.
struct Net
{
  BasisFamily family = BasisFamily::trig;
  std::vector<MultiIndex> coords;
  std::vector<double> weights; ///< ellipsoid weights on coords (empty when loaded from text)
  double radius = 0.0;
  double delta = 0.0;
  int truncation_level = 0;
  double step = 0.0;
  std::string construction = "lattice";
  std::vector<double> data; ///< row-major, size() x coords.size()

  std::size_t dimension() const { return coords.size(); }
  std::size_t size() const { return coords.empty() ? (data.empty() ? 0 : 1) : data.size() / coords.size(); }

  std::span<const double> point(std::size_t i) const
  {
    return {data.data() + i * coords.size(), coords.size()};
  }

  CoefficientVector point_vector(std::size_t i) const
  {
    return CoefficientVector::from_dense(family, coords, point(i));
  }
};

/// The cubic lattice (step * Z^m) intersected with the truncated ellipsoid E_M.
///
/// The step is delta / (2 sqrt(m)) for m coordinates, so rounding any point of
/// E_M toward zero lands on a lattice point of E_M within delta/2. Together
/// with the truncation tail bound this makes the lattice a delta-net of the
/// whole class. The net is kept implicit: counting, operator norms and argmin
/// searches never enumerate it.
class LatticeNet
{
public:
  LatticeNet() = default;

  /// `min_order` drops coordinates with |j| < min_order (a fixed constant term).
  static LatticeNet build(const Ellipsoid& e, double delta, int min_order = 0)
  {
    LatticeNet n;
    n.family_ = e.family();
    n.delta_ = delta;
    n.level_ = ::invprob::truncation_level(e, delta);
    n.coords_ = e.coordinates(n.level_, min_order);
    detail::require(!n.coords_.empty(), "LatticeNet: empty coordinate set");
    n.a_ = e.weights(n.coords_);
    n.radius_ = e.radius();
    n.step_ = delta / (2.0 * std::sqrt(static_cast<double>(n.coords_.size())));
    n.max_steps_.resize(n.coords_.size());
    for (std::size_t i = 0; i < n.coords_.size(); ++i) {
      double k = std::floor(n.radius_ / (n.a_[i] * n.step_));
      // fp guard: the single-coordinate point must pass the canonical test
      while (k > 0 && n.a_[i] * n.a_[i] * (n.step_ * k) * (n.step_ * k) > n.radius_ * n.radius_)
        k -= 1.0;
      n.max_steps_[i] = static_cast<long>(k);
    }
    return n;
  }

  BasisFamily family() const { return family_; }
  const std::vector<MultiIndex>& coords() const { return coords_; }
  const std::vector<double>& weights() const { return a_; }
  const std::vector<long>& max_steps() const { return max_steps_; }
  double radius() const { return radius_; }
  double step() const { return step_; }
  double delta() const { return delta_; }
  int truncation_level() const { return level_; }
  std::size_t dimension() const { return coords_.size(); }

  /// Canonical membership test shared by enumeration and search.
  bool within(std::span<const double> theta) const
  {
    return weighted_norm_sq(a_, theta) <= radius_ * radius_;
  }

  /// Lattice point obtained by truncating each coordinate toward zero.
  std::vector<double> round_toward_zero(std::span<const double> theta) const
  {
    std::vector<double> out(coords_.size());
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      double k = std::trunc(theta[i] / step_);
      k = std::clamp(k, -static_cast<double>(max_steps_[i]), static_cast<double>(max_steps_[i]));
      out[i] = step_ * k;
    }
    return out;
  }

  /// Exact count by enumeration, or nullopt once it exceeds `cap`.
  std::optional<std::uint64_t> exact_count(std::uint64_t cap) const
  {
    std::uint64_t count = 0;
    bool over = false;
    std::vector<double> theta(coords_.size());
    visit(theta, 0, 0.0, [&](std::span<const double>) {
      if (++count > cap) {
        over = true;
        return false;
      }
      return true;
    });
    if (over) return std::nullopt;
    return count;
  }

  /// All lattice points in enumeration (serialization) order; throws past `cap`.
  std::vector<double> enumerate(std::uint64_t cap) const
  {
    std::vector<double> data;
    std::uint64_t count = 0;
    std::vector<double> theta(coords_.size());
    bool over = false;
    visit(theta, 0, 0.0, [&](std::span<const double> p) {
      if (++count > cap) {
        over = true;
        return false;
      }
      data.insert(data.end(), p.begin(), p.end());
      return true;
    });
    if (over)
      throw ResourceError("delta-net holds more than " + std::to_string(cap) + " points (delta = "
                          + std::to_string(delta_) + ", M = " + std::to_string(level_)
                          + "); increase delta or raise the cap");
    return data;
  }

  /// Bounds on log #net by a budget-discretized dynamic program.
  ///
  /// Rounding every per-coordinate cost down (up) to whole bins counts a
  /// superset (subset) of the feasible lattice points, so both bounds are
  /// certified; their gap shrinks like m^2 / bins.
  LogCardinality log_cardinality(std::size_t bins = 0, double max_work = 4e9) const
  {
    const std::size_t m = coords_.size();
    if (bins == 0) bins = std::clamp<std::size_t>(16 * m * m, 4096, std::size_t{1} << 20);
    double work = 0.0;
    for (long k : max_steps_)
      work += static_cast<double>(k + 1) * static_cast<double>(bins);
    if (work > max_work)
      throw ResourceError("log_cardinality: counting work " + std::to_string(work)
                          + " exceeds the budget; increase delta");
    const double budget = radius_ * radius_;
    const double width = budget / static_cast<double>(bins);
    auto run = [&](bool round_up) {
      std::vector<double> cur(bins + 1, 0.0), next(bins + 1);
      cur[0] = 1.0;
      double log_scale = 0.0;
      std::vector<std::size_t> cost;
      for (std::size_t i = 0; i < m; ++i) {
        cost.clear();
        for (long k = 0; k <= max_steps_[i]; ++k) {
          const double v = step_ * static_cast<double>(k);
          const double c = a_[i] * a_[i] * v * v / width;
          const double r = round_up ? std::ceil(c) : std::floor(c);
          if (r > static_cast<double>(bins)) break;
          cost.push_back(static_cast<std::size_t>(r));
        }
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t k = 0; k < cost.size(); ++k) {
          const double mult = k == 0 ? 1.0 : 2.0;
          const std::size_t c = cost[k];
          for (std::size_t b = c; b <= bins; ++b)
            next[b] += mult * cur[b - c];
        }
        double mx = *std::max_element(next.begin(), next.end());
        if (mx <= 0.0) return -std::numeric_limits<double>::infinity();
        for (auto& v : next)
          v /= mx;
        log_scale += std::log(mx);
        std::swap(cur, next);
      }
      return log_scale + std::log(std::accumulate(cur.begin(), cur.end(), 0.0));
    };
    LogCardinality out;
    out.upper = run(false);
    out.lower = run(true);
    return out;
  }

  /// Exact nearest lattice point of the net to `target` (dense over coords).
  ///
  /// Minimizes quadratic_risk(theta, target) = ||theta - target||^2 - ||target||^2
  /// by depth-first branch and bound with Lagrangian lower bounds. Exact ties
  /// resolve to the point that comes first in enumeration order.
  NearestResult nearest(std::span<const double> target, std::size_t max_nodes = 50'000'000) const
  {
    detail::require(target.size() == coords_.size(), "LatticeNet::nearest: target size mismatch");
    for (double v : target)
      detail::require(std::isfinite(v), "LatticeNet::nearest: non-finite target");
    Search s(*this, target, max_nodes);
    return s.run();
  }

private:
  template<class Fn>
  bool visit(std::vector<double>& theta, std::size_t i, double used, Fn&& fn) const
  {
    if (i == coords_.size()) return fn(std::span<const double>(theta));
    const double budget = radius_ * radius_;
    for (long k = -max_steps_[i]; k <= max_steps_[i]; ++k) {
      const double v = step_ * static_cast<double>(k);
      const double u = used + a_[i] * a_[i] * v * v;
      if (u > budget) continue;
      theta[i] = v;
      if (!visit(theta, i + 1, u, fn)) return false;
    }
    theta[i] = 0.0;
    return true;
  }

  class Search
  {
  public:
    Search(const LatticeNet& net, std::span<const double> target, std::size_t max_nodes)
      : net_(net)
      , target_(target)
      , max_nodes_(max_nodes)
    {
      const std::size_t m = net.coords_.size();
      const double h = net.step_;
      budget_ = net.radius_ * net.radius_;
      y_.resize(m);
      sign_.resize(m);
      cap_.resize(m);
      w_.resize(m);
      for (std::size_t i = 0; i < m; ++i) {
        y_[i] = std::abs(target[i]) / h;
        sign_[i] = std::signbit(target[i]) ? -1.0 : 1.0;
        cap_[i] = std::min<long>(net.max_steps_[i], static_cast<long>(std::ceil(y_[i])));
        w_[i] = net.a_[i] * net.a_[i] * h * h;
      }
      order_.resize(m);
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      std::stable_sort(order_.begin(), order_.end(), [&](auto l, auto r) { return w_[l] > w_[r]; });

      const double lam = continuous_multiplier();
      lambdas_ = {0.0};
      if (lam > 0.0)
        for (double f : {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0})
          lambdas_.push_back(lam * f);
      suffix_.assign(lambdas_.size(), std::vector<double>(m + 1, 0.0));
      for (std::size_t l = 0; l < lambdas_.size(); ++l)
        for (std::size_t t = m; t-- > 0;)
          suffix_[l][t] = suffix_[l][t + 1] + penalized_min(order_[t], lambdas_[l]).second;
      theta_.assign(m, 0.0);
      steps_.assign(m, 0);
    }

    NearestResult run()
    {
      seed_incumbent();
      descend(0, 0.0, 0.0);
      NearestResult out;
      out.theta = best_theta_;
      out.risk = best_risk_;
      out.ties = ties_;
      out.nodes = nodes_;
      return out;
    }

  private:
    double cost(std::size_t i, long n) const
    {
      const double d = net_.step_ * (static_cast<double>(n) - y_[i]);
      return d * d;
    }

    // argmin and value of cost + lam * w n^2 over n in [0, cap].
    std::pair<long, double> penalized_min(std::size_t i, double lam) const
    {
      const double x = y_[i] / (1.0 + lam * net_.a_[i] * net_.a_[i]);
      long lo = std::clamp<long>(static_cast<long>(std::floor(x)), 0, cap_[i]);
      long hi = std::clamp<long>(lo + 1, 0, cap_[i]);
      const double vl = cost(i, lo) + lam * w_[i] * lo * lo;
      const double vh = cost(i, hi) + lam * w_[i] * hi * hi;
      return vl <= vh ? std::pair{lo, vl} : std::pair{hi, vh};
    }

    double continuous_multiplier() const
    {
      auto excess = [&](double lam) {
        double s = 0.0;
        for (std::size_t i = 0; i < y_.size(); ++i) {
          const double x = std::min<double>(y_[i] / (1.0 + lam * net_.a_[i] * net_.a_[i]), cap_[i]);
          s += w_[i] * x * x;
        }
        return s - budget_;
      };
      if (excess(0.0) <= 0.0) return 0.0;
      double hi = 1.0;
      while (excess(hi) > 0.0 && hi < 1e300)
        hi *= 2.0;
      double lo = 0.0;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
      }
      return hi;
    }

    double lower_bound(std::size_t depth, double used, double partial) const
    {
      double best = -std::numeric_limits<double>::infinity();
      const double slack = budget_ - used;
      for (std::size_t l = 0; l < lambdas_.size(); ++l)
        best = std::max(best, suffix_[l][depth] - lambdas_[l] * slack);
      return partial + best;
    }

    void consider_leaf()
    {
      std::vector<double> theta(theta_.size());
      for (std::size_t i = 0; i < theta.size(); ++i)
        theta[i] = steps_[i] == 0 ? 0.0 : sign_[i] * (net_.step_ * static_cast<double>(steps_[i]));
      if (!net_.within(theta)) return;
      const double r = quadratic_risk(theta, target_);
      if (!has_best_ || r < best_risk_) {
        best_risk_ = r;
        best_theta_ = std::move(theta);
        ties_ = 1;
        has_best_ = true;
      } else if (r == best_risk_) {
        ++ties_;
        if (std::lexicographical_compare(theta.begin(), theta.end(), best_theta_.begin(), best_theta_.end()))
          best_theta_ = std::move(theta);
      }
    }

    void seed_incumbent()
    {
      // floor of the continuous relaxation is feasible; then greedy upgrades
      const double lam = lambdas_.size() > 1 ? lambdas_[4] : 0.0;
      double used = 0.0;
      for (std::size_t i = 0; i < y_.size(); ++i) {
        long n = std::clamp<long>(static_cast<long>(std::floor(y_[i] / (1.0 + lam * net_.a_[i] * net_.a_[i]))), 0,
                                  cap_[i]);
        steps_[i] = n;
        used += w_[i] * n * n;
      }
      for (;;) {
        std::size_t pick = y_.size();
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < y_.size(); ++i) {
          const long n = steps_[i];
          if (n >= cap_[i]) continue;
          const double gain = cost(i, n) - cost(i, n + 1);
          const double dw = w_[i] * (2.0 * n + 1.0);
          if (gain <= 0.0 || used + dw > budget_) continue;
          if (gain / dw > best_ratio) {
            best_ratio = gain / dw;
            pick = i;
          }
        }
        if (pick == y_.size()) break;
        used += w_[pick] * (2.0 * steps_[pick] + 1.0);
        ++steps_[pick];
      }
      consider_leaf();
      if (!has_best_) {
        std::fill(steps_.begin(), steps_.end(), 0);
        consider_leaf();
      }
      ties_ = 0; // recounted during the search
    }

    void descend(std::size_t depth, double used, double partial)
    {
      if (++nodes_ > max_nodes_)
        throw ResourceError("nearest-point search exceeded " + std::to_string(max_nodes_)
                            + " nodes; use a coarser net");
      const std::size_t m = order_.size();
      if (depth == m) {
        consider_leaf();
        return;
      }
      const double tol = 1e-12 * (1.0 + std::abs(best_risk_) + sum_y_sq());
      const std::size_t i = order_[depth];
      const double slack = budget_ - used;
      long feasible_max = cap_[i];
      while (feasible_max > 0 && w_[i] * feasible_max * feasible_max > slack * (1.0 + 1e-12))
        --feasible_max;
      // preferred value under the multiplier that gives this node its bound
      double lam_best = 0.0, lb_best = -std::numeric_limits<double>::infinity();
      for (std::size_t l = 0; l < lambdas_.size(); ++l) {
        const double lb = suffix_[l][depth] - lambdas_[l] * slack;
        if (lb > lb_best) {
          lb_best = lb;
          lam_best = lambdas_[l];
        }
      }
      long center = std::min(penalized_min(i, lam_best).first, feasible_max);
      for (long off = 0;; ++off) {
        bool any = false;
        for (long n : {center + off, center - off - 1}) {
          if (n < 0 || n > feasible_max) continue;
          any = true;
          const double u = used + w_[i] * n * n;
          const double p = partial + cost(i, n);
          if (lower_bound(depth + 1, u, p) - sum_y_sq() > best_risk_ + tol) continue;
          steps_[i] = n;
          descend(depth + 1, u, p);
        }
        if (!any) break;
      }
      steps_[i] = 0;
    }

    // cost() is measured from |target|, so shifting by ||target||^2 aligns it with quadratic_risk
    double sum_y_sq() const
    {
      if (sum_y_sq_ < 0.0) {
        double s = 0.0;
        for (double v : target_)
          s += v * v;
        sum_y_sq_ = s;
      }
      return sum_y_sq_;
    }

    const LatticeNet& net_;
    std::span<const double> target_;
    std::size_t max_nodes_;
    double budget_ = 0.0;
    std::vector<double> y_, sign_, w_;
    std::vector<long> cap_;
    std::vector<std::size_t> order_;
    std::vector<double> lambdas_;
    std::vector<std::vector<double>> suffix_;
    std::vector<double> theta_;
    std::vector<long> steps_;
    std::vector<double> best_theta_;
    double best_risk_ = std::numeric_limits<double>::infinity();
    bool has_best_ = false;
    std::size_t ties_ = 0;
    std::size_t nodes_ = 0;
    mutable double sum_y_sq_ = -1.0;
  };

  BasisFamily family_ = BasisFamily::trig;
  std::vector<MultiIndex> coords_;
  std::vector<double> a_;
  std::vector<long> max_steps_;
  double radius_ = 0.0;
  double step_ = 0.0;
  double delta_ = 0.0;
  int level_ = 0;
};

inline constexpr std::uint64_t kDefaultNetCap = std::uint64_t{1} << 24;

/// Materialized lattice delta-net of the ellipsoid.
inline Net build_delta_net(const Ellipsoid& e, double delta, std::uint64_t cap = kDefaultNetCap, int min_order = 0)
{
  const LatticeNet lattice = LatticeNet::build(e, delta, min_order);
  const auto bounds = lattice.log_cardinality();
  if (bounds.lower > std::log(static_cast<double>(cap)) + 1e-9) {
    double needed = delta;
    for (int it = 0; it < 200; ++it) {
      needed *= 1.1;
      try {
        if (LatticeNet::build(e, needed, min_order).log_cardinality().upper <= std::log(static_cast<double>(cap)))
          break;
      } catch (const InvalidArgument&) {
        break;
      }
    }
    throw ResourceError("delta-net would hold about exp(" + std::to_string(bounds.estimate()) + ") points, above the cap of "
                        + std::to_string(cap) + " (delta = " + std::to_string(delta) + ", M = "
                        + std::to_string(lattice.truncation_level()) + "); use delta >= "
                        + std::to_string(needed) + " or raise the cap");
  }
  Net net;
  net.family = e.family();
  net.coords = lattice.coords();
  net.weights = lattice.weights();
  net.radius = lattice.radius();
  net.delta = delta;
  net.truncation_level = lattice.truncation_level();
  net.step = lattice.step();
  net.data = lattice.enumerate(cap);
  return net;
}

struct CardinalityFit
{
  double slope = 0.0;
  std::vector<double> deltas;
  std::vector<double> log_cardinalities;
};

/// Least-squares slope of log(log #net) against log(1/delta).
inline CardinalityFit net_cardinality_exponent(const Ellipsoid& e, std::span<const double> deltas)
{
  CardinalityFit fit;
  std::vector<double> xs, ys;
  for (double d : deltas) {
    if (std::find(fit.deltas.begin(), fit.deltas.end(), d) != fit.deltas.end()) continue;
    const double lc = LatticeNet::build(e, d).log_cardinality().estimate();
    fit.deltas.push_back(d);
    fit.log_cardinalities.push_back(lc);
    if (lc > 0.0 && std::isfinite(lc)) {
      xs.push_back(std::log(1.0 / d));
      ys.push_back(std::log(lc));
    }
  }
  if (xs.size() < 2)
    throw InvalidArgument("net_cardinality_exponent: need at least two distinct deltas with a non-trivial net");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  return fit;
}

} // namespace invprob
