// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/coefficients.hpp"
#include "invprob/errors.hpp"
#include "invprob/multi_index.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace invprob {

/// Coefficient ellipsoid { theta : sum a_j^2 theta_j^2 <= L^2 }.
///
/// Weights follow a_j = c_law * max(|j|,1)^s unless overridden per index; every
/// weight must lie in the envelope [c1, c2] * max(|j|,1)^s. The max(.,1) keeps
/// the constant coordinate inside the class with weight c_law.
class Ellipsoid
{
public:
  struct Params
  {
    BasisFamily family = BasisFamily::trig;
    int dim = 1;
    double s = 1.0;
    double radius = 1.0;
    double c1 = 1.0;
    double c2 = 1.0;
    double c_law = 0.0; ///< 0 means use c1
    std::map<MultiIndex, double> overrides;
  };

  Ellipsoid() = default;

  explicit Ellipsoid(Params p)
    : p_(std::move(p))
  {
    if (p_.c_law == 0.0) p_.c_law = p_.c1;
    detail::require(p_.radius > 0.0, "Ellipsoid: radius L must be positive");
    detail::require(p_.s > 0.0, "Ellipsoid: smoothness s must be positive");
    detail::require(p_.c1 > 0.0 && p_.c2 >= p_.c1, "Ellipsoid: need 0 < C1 <= C2");
    detail::require(p_.c_law >= p_.c1 && p_.c_law <= p_.c2,
                    "Ellipsoid: weight-law constant outside [C1, C2]");
    if (p_.family == BasisFamily::disk || p_.family == BasisFamily::disk_with_constant)
      p_.dim = 2;
    if (p_.family == BasisFamily::cosine) p_.dim = 1;
    detail::require(p_.dim >= 1 && p_.dim <= kMaxDim, "Ellipsoid: dimension out of range");
    for (const auto& [idx, a] : p_.overrides) {
      detail::require(a > 0.0, "Ellipsoid: weight override must be positive at " + format_index(idx));
      detail::require(in_envelope(idx, a),
                      "Ellipsoid: weight override outside the polynomial envelope at " + format_index(idx));
    }
  }

  static Ellipsoid sobolev(BasisFamily family, int dim, double s, double radius, double c = 1.0)
  {
    Params p;
    p.family = family;
    p.dim = dim;
    p.s = s;
    p.radius = radius;
    p.c1 = p.c2 = p.c_law = c;
    return Ellipsoid(std::move(p));
  }

  const Params& params() const { return p_; }
  BasisFamily family() const { return p_.family; }
  int dim() const { return p_.dim; }
  double s() const { return p_.s; }
  double radius() const { return p_.radius; }
  double c1() const { return p_.c1; }
  double c2() const { return p_.c2; }

  double envelope_base(const MultiIndex& idx) const
  {
    return std::pow(static_cast<double>(std::max(idx.order(), 1)), p_.s);
  }

  bool in_envelope(const MultiIndex& idx, double a) const
  {
    const double base = envelope_base(idx);
    const double tol = 1e-12 * p_.c2 * base;
    return a >= p_.c1 * base - tol && a <= p_.c2 * base + tol;
  }

  double weight(const MultiIndex& idx) const
  {
    if (auto it = p_.overrides.find(idx); it != p_.overrides.end()) return it->second;
    return p_.c_law * envelope_base(idx);
  }

  std::vector<double> weights(std::span<const MultiIndex> coords) const
  {
    std::vector<double> a(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i)
      a[i] = weight(coords[i]);
    return a;
  }

  /// Basis indices with |j| <= max_order (and |j| >= min_order).
  std::vector<MultiIndex> coordinates(int max_order, int min_order = 0) const
  {
    auto all = enumerate_indices(p_.family, p_.dim, max_order);
    if (min_order <= 0) return all;
    std::vector<MultiIndex> out;
    for (const auto& m : all)
      if (m.order() >= min_order) out.push_back(m);
    return out;
  }

  double weighted_norm_sq(const CoefficientVector& theta) const
  {
    double s = 0.0;
    for (const auto& [idx, v] : theta.entries()) {
      const double a = weight(idx);
      s += a * a * v * v;
    }
    return s;
  }

  bool contains(const CoefficientVector& theta, double tol = 1e-12) const
  {
    return weighted_norm_sq(theta) <= p_.radius * p_.radius + tol;
  }

  /// B2 = sup ||g||_2 over the class = L / min_j a_j.
  double l2_bound() const
  {
    double amin = p_.c_law;
    for (const auto& [idx, a] : p_.overrides)
      amin = std::min(amin, a);
    return p_.radius / amin;
  }

private:
  Params p_;
};

/// Weighted squared norm of a dense vector.
inline double weighted_norm_sq(std::span<const double> a, std::span<const double> theta)
{
  double s = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i)
    s += a[i] * a[i] * theta[i] * theta[i];
  return s;
}

/// M = floor((sqrt(2) L / (C1 delta))^(1/s)); the tail beyond |j| > M then
/// carries at most delta^2/2 of squared l2 mass for every class member.
inline int truncation_level(const Ellipsoid& e, double delta)
{
  detail::require(delta > 0.0 && std::isfinite(delta), "truncation_level: delta must be positive");
  const double ratio = std::numbers::sqrt2 * e.radius() / (e.c1() * delta);
  const double m = std::floor(std::pow(ratio, 1.0 / e.s()));
  if (m < 1.0)
    throw InvalidArgument("truncation_level: delta = " + std::to_string(delta)
                          + " leaves no coordinate (M = 0); the class is covered by a single point."
                            " Use delta <= " + std::to_string(std::numbers::sqrt2 * e.radius() / e.c1()));
  if (m > 60000.0) throw ResourceError("truncation_level: M exceeds 60000; increase delta");
  return static_cast<int>(m);
}

/// Uniform draw from the solid ellipsoid restricted to `coords`.
template<class Rng>
std::vector<double> sample_uniform_ellipsoid(const Ellipsoid& e,
                                             std::span<const MultiIndex> coords,
                                             Rng& rng)
{
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  const std::size_t dim = coords.size();
  std::vector<double> g(dim);
  double nrm = 0.0;
  do {
    nrm = 0.0;
    for (auto& v : g) {
      v = normal(rng);
      nrm += v * v;
    }
  } while (nrm == 0.0);
  nrm = std::sqrt(nrm);
  const double radial = e.radius() * std::pow(unif(rng), 1.0 / static_cast<double>(dim));
  for (std::size_t i = 0; i < dim; ++i)
    g[i] = g[i] / nrm * radial / e.weight(coords[i]);
  return g;
}

} // namespace invprob
