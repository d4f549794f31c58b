// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/coefficients.hpp"
#include "invprob/ellipsoid.hpp"
#include "invprob/errors.hpp"
#include "invprob/models.hpp"
#include "invprob/net.hpp"
#include "invprob/operators.hpp"
#include "invprob/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <vector>

namespace invprob {

struct EstimateResult
{
  CoefficientVector estimate;
  double risk_value = 0.0;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t argmin_index = npos;  ///< position in a materialized net
  double lagrange_multiplier = 0.0; ///< dense mode
  std::size_t ties_broken = 0;
  std::size_t nodes = 0;            ///< search nodes (implicit nets)
  double seconds = 0.0;
};

/// Observation statistics aligned with `coords`; missing coordinates are an error.
inline std::vector<double> aligned_stats(const WhiteNoiseObservation& obs, std::span<const MultiIndex> coords)
{
  std::vector<double> z(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    auto it = std::lower_bound(obs.coords.begin(), obs.coords.end(), coords[i]);
    detail::require(it != obs.coords.end() && *it == coords[i],
                    "observation lacks coordinate " + format_index(coords[i]));
    z[i] = obs.z[static_cast<std::size_t>(it - obs.coords.begin())];
  }
  return z;
}

/// Empirical coefficients n^-1 sum_i b_j^-1 psi_j(Y_i); the density-mode
/// empirical risk is quadratic_risk against these.
inline std::vector<double> empirical_coefficients(const SvdOperator& op,
                                                  std::span<const MultiIndex> coords,
                                                  const SampleObservation& obs)
{
  detail::require(obs.n() >= 1, "empirical_coefficients: empty sample");
  detail::require(obs.dim == op.image_dim(), "empirical_coefficients: sample dimension mismatch");
  std::vector<double> z(coords.size(), 0.0);
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const double inv_b = op.inverse_singular_value(coords[k]);
    double s = 0.0;
    for (std::size_t i = 0; i < obs.n(); ++i)
      s += op.image_basis(coords[k], obs.point(i));
    z[k] = inv_b * s / static_cast<double>(obs.n());
  }
  return z;
}

/// Exhaustive argmin of quadratic_risk over a materialized net. Ties go to the
/// lowest index; the reduction is index-ordered, so thread count never matters.
inline EstimateResult delta_net_minimize(const Net& net, std::span<const double> z, unsigned threads = 1)
{
  const auto t0 = std::chrono::steady_clock::now();
  detail::require(net.size() >= 1, "delta_net_minimize: empty net");
  detail::require(z.size() == net.dimension(), "delta_net_minimize: statistic size mismatch");
  for (double v : z)
    detail::require(std::isfinite(v), "delta_net_minimize: non-finite statistic");
  const std::size_t chunks = std::min<std::size_t>(net.size(), 64);
  struct Partial
  {
    double risk = std::numeric_limits<double>::infinity();
    std::size_t index = 0;
    std::size_t ties = 0;
  };
  std::vector<Partial> part(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t lo = net.size() * c / chunks, hi = net.size() * (c + 1) / chunks;
    Partial p;
    for (std::size_t i = lo; i < hi; ++i) {
      const double r = quadratic_risk(net.point(i), z);
      if (r < p.risk) {
        p = {r, i, 1};
      } else if (r == p.risk) {
        ++p.ties;
      }
    }
    part[c] = p;
  });
  Partial best;
  for (const auto& p : part) {
    if (p.ties == 0) continue;
    if (p.risk < best.risk)
      best = p;
    else if (p.risk == best.risk)
      best.ties += p.ties;
  }
  EstimateResult out;
  out.estimate = net.point_vector(best.index);
  out.risk_value = best.risk;
  out.argmin_index = best.index;
  out.ties_broken = best.ties;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline EstimateResult delta_net_minimize(const Net& net, const WhiteNoiseObservation& obs, unsigned threads = 1)
{
  return delta_net_minimize(net, aligned_stats(obs, net.coords), threads);
}

inline EstimateResult delta_net_minimize(const Net& net,
                                         const SampleObservation& obs,
                                         const SvdOperator& op,
                                         unsigned threads = 1)
{
  return delta_net_minimize(net, empirical_coefficients(op, net.coords, obs), threads);
}

/// Exact argmin over an implicit lattice net by branch and bound.
inline EstimateResult delta_net_minimize(const LatticeNet& net, std::span<const double> z)
{
  const auto t0 = std::chrono::steady_clock::now();
  auto r = net.nearest(z);
  EstimateResult out;
  out.estimate = CoefficientVector::from_dense(net.family(), net.coords(), r.theta);
  out.risk_value = r.risk;
  out.ties_broken = r.ties;
  out.nodes = r.nodes;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline EstimateResult delta_net_minimize(const LatticeNet& net, const WhiteNoiseObservation& obs)
{
  return delta_net_minimize(net, aligned_stats(obs, net.coords()));
}

inline EstimateResult delta_net_minimize(const LatticeNet& net, const SampleObservation& obs, const SvdOperator& op)
{
  return delta_net_minimize(net, empirical_coefficients(op, net.coords(), obs));
}

/// Minimizer of quadratic_risk over { sum a^2 theta^2 <= L^2 } and its multiplier.
struct DenseSolution
{
  std::vector<double> theta;
  double lambda = 0.0;
};

/// theta(lambda) = z / (1 + lambda a^2), lambda = 0 when z is feasible, else
/// the root of the constraint by bisection. The bracket top ||z/a|| / L is
/// always feasible, and the returned point is the feasible end of the bracket.
inline DenseSolution dense_minimize(std::span<const double> a, std::span<const double> z, double radius, double epsilon)
{
  detail::require(a.size() == z.size(), "dense_minimize: size mismatch");
  detail::require(radius > 0.0, "dense_minimize: radius must be positive");
  for (double v : z)
    detail::require(std::isfinite(v), "dense_minimize: non-finite statistic");
  const double budget = radius * radius;
  DenseSolution sol;
  sol.theta.assign(z.begin(), z.end());
  if (weighted_norm_sq(a, z) <= budget) return sol;
  auto at = [&](double lam, std::vector<double>& th) {
    for (std::size_t i = 0; i < z.size(); ++i)
      th[i] = z[i] / (1.0 + lam * a[i] * a[i]);
    return weighted_norm_sq(a, th);
  };
  double zn = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    zn += z[i] * z[i] / (a[i] * a[i]);
  double lo = 0.0, hi = std::sqrt(zn) / radius;
  std::vector<double> th(z.size());
  while (at(hi, th) > budget)
    hi *= 2.0;
  // bisect to machine resolution; epsilon only bounds what the caller may assume
  (void)epsilon;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (at(mid, th) > budget ? lo : hi) = mid;
  }
  at(hi, th);
  sol.theta = th;
  sol.lambda = hi;
  return sol;
}

/// Dense estimator over the ellipsoid truncated at |j| <= M.
inline EstimateResult dense_minimize(const Ellipsoid& e, std::span<const MultiIndex> coords, std::span<const double> z,
                                     int M, double epsilon = 1e-10)
{
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<MultiIndex> kept;
  std::vector<double> zk;
  for (std::size_t i = 0; i < coords.size(); ++i)
    if (coords[i].order() <= M) {
      kept.push_back(coords[i]);
      zk.push_back(z[i]);
    }
  detail::require(kept.size() == e.coordinates(M).size(), "dense_minimize: statistics do not cover |j| <= M");
  const auto a = e.weights(kept);
  auto sol = dense_minimize(a, zk, e.radius(), epsilon);
  EstimateResult out;
  out.estimate = CoefficientVector::from_dense(e.family(), kept, sol.theta);
  out.risk_value = quadratic_risk(sol.theta, zk);
  out.lagrange_multiplier = sol.lambda;
  out.ties_broken = 1;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

inline EstimateResult dense_minimize(const Ellipsoid& e, const WhiteNoiseObservation& obs, int M, double epsilon = 1e-10)
{
  return dense_minimize(e, obs.coords, obs.z, M, epsilon);
}

inline EstimateResult dense_minimize(const Ellipsoid& e,
                                     const SampleObservation& obs,
                                     const SvdOperator& op,
                                     int M,
                                     double epsilon = 1e-10)
{
  const auto coords = e.coordinates(M);
  return dense_minimize(e, coords, empirical_coefficients(op, coords, obs), M, epsilon);
}

/// One additive coordinate: a 1D cosine class and operator acting on `axis`.
struct AdditiveComponent
{
  Ellipsoid ellipsoid;
  SvdOperator op;
  double delta = 0.1;
  int axis = 0;
};

/// f(x) = constant + sum_k f_k(x_axis(k)), with each f_k centered.
struct AdditiveSpec
{
  int dim = 2;
  std::vector<AdditiveComponent> components;
  double c = 1.0;        ///< geometry constant
  double constant = 0.0; ///< fixed coefficient of the constant function

  void validate() const
  {
    detail::require(components.size() >= 2, "AdditiveSpec: need at least two components");
    detail::require(c > 0.0, "AdditiveSpec: geometry constant must be positive");
    std::set<int> axes;
    for (const auto& comp : components) {
      detail::require(comp.ellipsoid.family() == BasisFamily::cosine && comp.op.family() == BasisFamily::cosine,
                      "AdditiveSpec: components use the cosine family");
      detail::require(comp.axis >= 0 && comp.axis < dim, "AdditiveSpec: axis out of range");
      if (!axes.insert(comp.axis).second)
        throw InvalidArgument("AdditiveSpec: components share axis " + std::to_string(comp.axis)
                              + "; overlapping supports break separability");
    }
  }

  /// Joint trig index of component index j on `axis`.
  MultiIndex embed(const MultiIndex& j, int axis) const
  {
    MultiIndex m;
    m.dim = static_cast<std::uint8_t>(dim);
    m.j[axis] = j.j[0];
    return m;
  }

  MultiIndex constant_index() const
  {
    MultiIndex m;
    m.dim = static_cast<std::uint8_t>(dim);
    return m;
  }

  /// Sorted joint coordinates for component coordinates with 1 <= |j| <= level[k].
  std::vector<MultiIndex> joint_coords(std::span<const int> levels) const
  {
    std::set<MultiIndex> all{constant_index()};
    for (std::size_t k = 0; k < components.size(); ++k)
      for (int j = 1; j <= levels[k]; ++j)
        all.insert(embed(MultiIndex::scalar(j), components[k].axis));
    return {all.begin(), all.end()};
  }

  /// 1/b for a joint coordinate (the constant is observed without scaling).
  double inverse_singular_value(const MultiIndex& idx) const
  {
    if (idx.is_zero()) return 1.0;
    for (const auto& comp : components)
      if (idx.j[comp.axis] == idx.order()) return comp.op.inverse_singular_value(MultiIndex::scalar(idx.order()));
    throw InvalidArgument("AdditiveSpec: index " + format_index(idx) + " is not additive");
  }
};

namespace detail {

inline std::vector<double> component_stats(const AdditiveSpec& spec,
                                           std::size_t k,
                                           std::span<const MultiIndex> comp_coords,
                                           const WhiteNoiseObservation& obs)
{
  std::vector<MultiIndex> joint;
  for (const auto& c : comp_coords)
    joint.push_back(spec.embed(c, spec.components[k].axis));
  return aligned_stats(obs, joint);
}

inline NearestResult component_argmin(const LatticeNet& net, std::span<const double> z)
{
  return net.nearest(z);
}

inline NearestResult component_argmin(const Net& net, std::span<const double> z)
{
  auto r = delta_net_minimize(net, z);
  NearestResult out;
  const auto p = net.point(r.argmin_index);
  out.theta.assign(p.begin(), p.end());
  out.risk = r.risk_value;
  out.ties = r.ties_broken;
  return out;
}

inline const std::vector<MultiIndex>& net_coords(const LatticeNet& n) { return n.coords(); }
inline const std::vector<MultiIndex>& net_coords(const Net& n) { return n.coords; }

} // namespace detail

/// Argmin over the product net; the risk separates across components, so it
/// is the concatenation of per-component argmins with the constant fixed.
template<class NetT>
EstimateResult additive_minimize(const AdditiveSpec& spec, const std::vector<NetT>& nets, const WhiteNoiseObservation& obs)
{
  const auto t0 = std::chrono::steady_clock::now();
  spec.validate();
  detail::require(nets.size() == spec.components.size(), "additive_minimize: one net per component");
  CoefficientVector est(BasisFamily::trig);
  est.set(spec.constant_index(), spec.constant);
  std::size_t ties = 1, nodes = 0;
  for (std::size_t k = 0; k < nets.size(); ++k) {
    const auto& coords = detail::net_coords(nets[k]);
    for (const auto& c : coords)
      detail::require(c.order() >= 1, "additive_minimize: component nets must exclude the constant");
    const auto z = detail::component_stats(spec, k, coords, obs);
    const auto r = detail::component_argmin(nets[k], z);
    ties *= r.ties;
    nodes += r.nodes;
    for (std::size_t i = 0; i < coords.size(); ++i)
      est.set(spec.embed(coords[i], spec.components[k].axis), r.theta[i]);
  }
  std::vector<MultiIndex> joint;
  std::vector<double> theta;
  for (const auto& [idx, v] : est.entries()) {
    joint.push_back(idx);
    theta.push_back(v);
  }
  EstimateResult out;
  out.estimate = est;
  out.risk_value = quadratic_risk(theta, aligned_stats(obs, joint));
  out.ties_broken = ties;
  out.nodes = nodes;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Brute-force argmin risk over the full product of materialized component nets.
inline EstimateResult additive_exhaustive(const AdditiveSpec& spec,
                                          const std::vector<Net>& nets,
                                          const WhiteNoiseObservation& obs,
                                          std::size_t cap = 10000)
{
  spec.validate();
  std::size_t total = 1;
  for (const auto& n : nets) {
    total *= n.size();
    detail::require(total <= cap, "additive_exhaustive: product net exceeds the cap");
  }
  // joint coordinate layout
  std::set<MultiIndex> all{spec.constant_index()};
  for (std::size_t k = 0; k < nets.size(); ++k)
    for (const auto& c : nets[k].coords)
      all.insert(spec.embed(c, spec.components[k].axis));
  const std::vector<MultiIndex> joint(all.begin(), all.end());
  const auto z = aligned_stats(obs, joint);
  std::vector<std::vector<std::size_t>> pos(nets.size());
  for (std::size_t k = 0; k < nets.size(); ++k)
    for (const auto& c : nets[k].coords)
      pos[k].push_back(static_cast<std::size_t>(
        std::lower_bound(joint.begin(), joint.end(), spec.embed(c, spec.components[k].axis)) - joint.begin()));
  std::vector<double> theta(joint.size(), 0.0);
  theta[0] = spec.constant;
  std::vector<std::size_t> ctr(nets.size(), 0);
  EstimateResult out;
  out.risk_value = std::numeric_limits<double>::infinity();
  std::vector<double> best;
  for (std::size_t it = 0; it < total; ++it) {
    for (std::size_t k = 0; k < nets.size(); ++k) {
      const auto p = nets[k].point(ctr[k]);
      for (std::size_t i = 0; i < p.size(); ++i)
        theta[pos[k][i]] = p[i];
    }
    const double r = quadratic_risk(theta, z);
    if (r < out.risk_value) {
      out.risk_value = r;
      best = theta;
      out.argmin_index = it;
      out.ties_broken = 1;
    } else if (r == out.risk_value) {
      ++out.ties_broken;
    }
    for (std::size_t k = nets.size(); k-- > 0;) {
      if (++ctr[k] < nets[k].size()) break;
      ctr[k] = 0;
    }
  }
  out.estimate = CoefficientVector::from_dense(BasisFamily::trig, joint, best);
  return out;
}

} // namespace invprob
