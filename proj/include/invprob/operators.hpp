// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/basis.hpp"
#include "invprob/coefficients.hpp"
#include "invprob/errors.hpp"
#include "invprob/multi_index.hpp"
#include "invprob/net.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace invprob {

enum class OperatorKind
{
  convolution,
  radon2d,
  tomography2d
};

inline std::string to_string(OperatorKind k)
{
  switch (k) {
  case OperatorKind::convolution: return "convolution";
  case OperatorKind::radon2d: return "radon2d";
  case OperatorKind::tomography2d: return "tomography2d";
  }
  return "?";
}

inline OperatorKind operator_kind_from_string(const std::string& s)
{
  if (s == "convolution") return OperatorKind::convolution;
  if (s == "radon2d" || s == "radon") return OperatorKind::radon2d;
  if (s == "tomography2d" || s == "tomography") return OperatorKind::tomography2d;
  throw InvalidArgument("unknown operator kind '" + s + "'");
}

/// Diagonal operator in its singular bases: A phi_j = b_j psi_j.
///
/// Convolution acts on the tensor trigonometric system (or its cosine half)
/// with psi_j = phi_j and Lebesgue image measure. radon2d maps the Zernike
/// disk system to the Chebyshev image system under nu; tomography2d is the
/// density version on the same spaces and keeps the constant (0,0).
class SvdOperator
{
public:
  struct Params
  {
    OperatorKind kind = OperatorKind::convolution;
    BasisFamily family = BasisFamily::trig;
    int dim = 1;
    double q = 1.0;
    double c = 1.0;        ///< law constant: b_j = c max(|j|,1)^-q (convolution)
    double env_lo = 0.0;   ///< decay envelope; 0 means the law itself
    double env_hi = 0.0;
    double floor = 1e-14;
    std::map<MultiIndex, double> overrides;
  };

  SvdOperator() = default;

  explicit SvdOperator(Params p)
    : p_(std::move(p))
  {
    switch (p_.kind) {
    case OperatorKind::convolution:
      detail::require(p_.family == BasisFamily::trig || p_.family == BasisFamily::cosine,
                      "SvdOperator: convolution acts on the trig or cosine family");
      detail::require(p_.q >= 0.0, "SvdOperator: q must be non-negative");
      detail::require(p_.c > 0.0, "SvdOperator: law constant must be positive");
      if (p_.family == BasisFamily::cosine) p_.dim = 1;
      if (p_.env_lo == 0.0) p_.env_lo = p_.c;
      if (p_.env_hi == 0.0) p_.env_hi = p_.c;
      break;
    case OperatorKind::radon2d:
      p_.family = BasisFamily::disk;
      p_.dim = 2;
      p_.q = 0.5;
      p_.c = std::numbers::inv_pi;
      if (p_.env_lo == 0.0) p_.env_lo = std::numbers::inv_pi / std::numbers::sqrt2;
      if (p_.env_hi == 0.0) p_.env_hi = std::numbers::inv_pi;
      break;
    case OperatorKind::tomography2d:
      p_.family = BasisFamily::disk_with_constant;
      p_.dim = 2;
      p_.q = 0.5;
      p_.c = 1.0;
      if (p_.env_lo == 0.0) p_.env_lo = 1.0 / std::numbers::sqrt2;
      if (p_.env_hi == 0.0) p_.env_hi = 1.0;
      break;
    }
    detail::require(p_.env_lo > 0.0 && p_.env_hi >= p_.env_lo, "SvdOperator: invalid decay envelope");
    for (const auto& [idx, b] : p_.overrides) {
      detail::require(b > 0.0, "SvdOperator: singular value override must be positive at " + format_index(idx));
      detail::require(in_envelope(idx, b),
                      "SvdOperator: singular value outside the decay envelope at " + format_index(idx));
    }
  }

  static SvdOperator convolution(int dim, double q, double c = 1.0, BasisFamily family = BasisFamily::trig)
  {
    Params p;
    p.kind = OperatorKind::convolution;
    p.family = family;
    p.dim = dim;
    p.q = q;
    p.c = c;
    return SvdOperator(std::move(p));
  }

  static SvdOperator radon2d()
  {
    Params p;
    p.kind = OperatorKind::radon2d;
    return SvdOperator(std::move(p));
  }

  static SvdOperator tomography2d()
  {
    Params p;
    p.kind = OperatorKind::tomography2d;
    return SvdOperator(std::move(p));
  }

  const Params& params() const { return p_; }
  OperatorKind kind() const { return p_.kind; }
  BasisFamily family() const { return p_.family; }
  int dim() const { return p_.dim; }
  double q() const { return p_.q; }
  double floor() const { return p_.floor; }

  /// Dimension of an image-space point: (u, phi) for the Radon kinds.
  int image_dim() const { return p_.kind == OperatorKind::convolution ? p_.dim : 2; }

  bool in_envelope(const MultiIndex& idx, double b) const
  {
    const double base = std::pow(static_cast<double>(std::max(idx.order(), 1)), -p_.q);
    const double tol = 1e-12 * p_.env_hi * base;
    return b >= p_.env_lo * base - tol && b <= p_.env_hi * base + tol;
  }

  void check_index(const MultiIndex& idx) const
  {
    switch (p_.kind) {
    case OperatorKind::convolution:
      detail::require(idx.dim == p_.dim && idx.parity_valid(),
                      "SvdOperator: index " + format_index(idx) + " is not in the trig system");
      detail::require(p_.family != BasisFamily::cosine || idx.parity == 0,
                      "SvdOperator: sine index " + format_index(idx) + " in a cosine system");
      break;
    case OperatorKind::radon2d:
      detail::require_disk_index(idx, false, "SvdOperator");
      break;
    case OperatorKind::tomography2d:
      detail::require_disk_index(idx, true, "SvdOperator");
      break;
    }
  }

  double singular_value(const MultiIndex& idx) const
  {
    check_index(idx);
    if (auto it = p_.overrides.find(idx); it != p_.overrides.end()) return it->second;
    if (p_.kind != OperatorKind::convolution) return p_.c / std::sqrt(idx.order() + 1.0);
    return p_.c * std::pow(static_cast<double>(std::max(idx.order(), 1)), -p_.q);
  }

  std::vector<double> singular_values(std::span<const MultiIndex> coords) const
  {
    std::vector<double> b(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i)
      b[i] = singular_value(coords[i]);
    return b;
  }

  /// 1/b_j, refusing singular values below the floor.
  double inverse_singular_value(const MultiIndex& idx) const
  {
    const double b = singular_value(idx);
    if (b < p_.floor)
      throw NumericalError("operator is numerically singular at index " + format_index(idx) + " (b = "
                           + std::to_string(b) + ")");
    return 1.0 / b;
  }

  /// Image basis function psi_j at an image-space point.
  double image_basis(const MultiIndex& idx, std::span<const double> y) const
  {
    if (p_.kind == OperatorKind::convolution) return eval_trig_basis(idx, y);
    return detail::radon_image_unchecked(idx, RadonPoint{y[0], y[1]});
  }

  /// Density of the image measure nu with respect to Lebesgue measure.
  double image_measure_density(std::span<const double> y) const
  {
    return p_.kind == OperatorKind::convolution ? 1.0 : radon_measure_density(y[0]);
  }

  /// Total nu-mass of the image domain.
  double image_measure_total() const { return p_.kind == OperatorKind::convolution ? 1.0 : std::numbers::pi; }

  bool in_image_domain(std::span<const double> y) const
  {
    if (static_cast<int>(y.size()) != image_dim()) return false;
    if (p_.kind == OperatorKind::convolution)
      return std::all_of(y.begin(), y.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
    return y[0] >= 0.0 && y[0] <= 1.0 && y[1] >= 0.0 && y[1] < 2.0 * std::numbers::pi;
  }

private:
  Params p_;
};

/// Fourier coefficients of a 1-periodic convolution kernel.
struct ConvolutionFilter
{
  std::map<MultiIndex, double> coefficients;

  /// Operator whose stored singular values are these coefficients.
  SvdOperator to_operator(int dim, double q, double env_lo, double env_hi) const
  {
    SvdOperator::Params p;
    p.kind = OperatorKind::convolution;
    p.dim = dim;
    p.q = q;
    p.c = env_lo;
    p.env_lo = env_lo;
    p.env_hi = env_hi;
    p.overrides = coefficients;
    return SvdOperator(std::move(p));
  }
};

/// Image-side coefficients (Ag)_j = b_j theta_j.
inline CoefficientVector apply_A(const SvdOperator& op, const CoefficientVector& g)
{
  CoefficientVector out(g.family());
  for (const auto& [idx, v] : g.entries())
    out.set(idx, op.singular_value(idx) * v);
  return out;
}

/// Image-side coefficients (Qg)_j = theta_j / b_j.
inline CoefficientVector apply_Q(const SvdOperator& op, const CoefficientVector& g)
{
  CoefficientVector out(g.family());
  for (const auto& [idx, v] : g.entries())
    out.set(idx, op.inverse_singular_value(idx) * v);
  return out;
}

/// Source-side coefficients of A^-1 h for image coefficients of h.
inline CoefficientVector apply_A_inverse(const SvdOperator& op, const CoefficientVector& h)
{
  return apply_Q(op, h);
}

/// Image-space function sum_j c_j psi_j evaluated at y.
inline double eval_image_function(const SvdOperator& op, const CoefficientVector& c, std::span<const double> y)
{
  double s = 0.0;
  for (const auto& [idx, v] : c.entries())
    if (v != 0.0) s += v * op.image_basis(idx, y);
  return s;
}

/// (Qg)(y) = sum_j theta_j / b_j psi_j(y).
inline double eval_Q_pointwise(const SvdOperator& op, const CoefficientVector& g, std::span<const double> y)
{
  detail::require(op.in_image_domain(y), "eval_Q_pointwise: point outside the image domain");
  double s = 0.0;
  for (const auto& [idx, v] : g.entries())
    if (v != 0.0) s += v * op.inverse_singular_value(idx) * op.image_basis(idx, y);
  return s;
}

/// Source function g = sum theta_j phi_j at a point of the source domain.
/// Disk points are Cartesian (x, y).
inline double eval_source_function(const SvdOperator& op, const CoefficientVector& g, std::span<const double> x)
{
  double s = 0.0;
  if (op.kind() == OperatorKind::convolution) {
    for (const auto& [idx, v] : g.entries())
      if (v != 0.0) s += v * eval_trig_basis(idx, x);
    return s;
  }
  const DiskPoint p{std::hypot(x[0], x[1]), std::atan2(x[1], x[0])};
  for (const auto& [idx, v] : g.entries())
    if (v != 0.0) s += v * detail::disk_unchecked(idx, p);
  return s;
}

/// Integral of psi_j over the image domain under nu.
inline double image_basis_integral(const SvdOperator& op, const MultiIndex& idx)
{
  if (op.kind() == OperatorKind::convolution) return idx.is_zero() ? 1.0 : 0.0;
  return idx.is_zero() ? std::sqrt(std::numbers::pi) : 0.0;
}

/// Operator norm over pairs of net points, with the evidence that backs it.
struct OperatorNorm
{
  double value = 0.0;  ///< exact value, or the certified upper bound
  double upper = 0.0;
  double lower = 0.0;
  bool exact = false;
};

namespace detail {

inline double pair_ratio(std::span<const double> x, std::span<const double> y, std::span<const double> scale)
{
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    num += d * d * scale[i] * scale[i];
    den += d * d;
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

// Max pair ratio of ||diag(scale)(x - y)|| / ||x - y||: exhaustive up to
// `exhaustive_limit` points, else diagonal upper bound plus sampled pairs.
inline OperatorNorm pairwise_norm(std::size_t count,
                                  std::span<const double> scale,
                                  auto point,
                                  std::size_t exhaustive_limit,
                                  std::size_t sampled_pairs)
{
  const std::size_t m = scale.size();
  // coordinates on which the points actually vary
  std::vector<bool> varies(m, false);
  for (std::size_t i = 1; i < count; ++i) {
    auto p = point(i), p0 = point(0);
    for (std::size_t k = 0; k < m; ++k)
      if (p[k] != p0[k]) varies[k] = true;
  }
  double upper = 0.0;
  for (std::size_t k = 0; k < m; ++k)
    if (varies[k]) upper = std::max(upper, std::abs(scale[k]));
  OperatorNorm out;
  out.upper = upper;
  if (count <= exhaustive_limit) {
    double best = 0.0;
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = i + 1; j < count; ++j)
        best = std::max(best, pair_ratio(point(i), point(j), scale));
    out.value = out.lower = out.upper = best;
    out.exact = true;
    return out;
  }
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  double best = 0.0;
  for (std::size_t s = 0; s < sampled_pairs; ++s) {
    const std::size_t i = pick(rng), j = pick(rng);
    if (i != j) best = std::max(best, pair_ratio(point(i), point(j), scale));
  }
  out.lower = best;
  out.value = upper;
  return out;
}

} // namespace detail

/// rho(Q, net) = max over distinct pairs of ||Q(phi - phi')|| / ||phi - phi'||.
inline OperatorNorm rho_Q(const SvdOperator& op, const Net& net)
{
  detail::require(net.size() >= 2, "rho_Q: net needs at least two points");
  std::vector<double> inv(net.coords.size());
  for (std::size_t i = 0; i < inv.size(); ++i)
    inv[i] = op.inverse_singular_value(net.coords[i]);
  return detail::pairwise_norm(net.size(), inv, [&](std::size_t i) { return net.point(i); }, 2000, 100000);
}

/// Exact rho(Q, .) for a lattice net: the pair (0, h e_j) exists for every
/// coordinate admitting a nonzero step, and no pair can exceed the largest such 1/b_j.
inline OperatorNorm rho_Q(const SvdOperator& op, const LatticeNet& net)
{
  double best = 0.0;
  std::size_t active = 0;
  for (std::size_t i = 0; i < net.dimension(); ++i)
    if (net.max_steps()[i] >= 1) {
      best = std::max(best, op.inverse_singular_value(net.coords()[i]));
      ++active;
    }
  detail::require(active > 0, "rho_Q: net needs at least two points");
  return {best, best, best, true};
}

/// (1/sqrt 2) max pairwise ||A(f - g)|| / ||f - g||, exhaustive.
template<class PointSet>
double rho_K_whitenoise(const SvdOperator& op, const PointSet& set)
{
  detail::require(set.size() >= 2, "rho_K_whitenoise: need at least two points");
  const auto b = op.singular_values(set.coords);
  auto norm = detail::pairwise_norm(set.size(), b, [&](std::size_t i) { return set.point(i); },
                                    std::numeric_limits<std::size_t>::max(), 0);
  return norm.value / std::numbers::sqrt2;
}

/// Chord-average Radon transform of a finite disk expansion at line (u, phi):
/// pi / (2 sqrt(1-u^2)) times the line integral, by 128-node Gauss-Legendre.
inline double radon_forward_quadrature(const CoefficientVector& f, double u, double phi)
{
  detail::require(u >= 0.0, "radon_forward_quadrature: u must be in [0,1)");
  if (u >= 1.0) throw InvalidArgument("radon_forward_quadrature: u >= 1 gives a degenerate chord");
  using Rule = boost::math::quadrature::gauss<double, 128>;
  const double half = std::sqrt(1.0 - u * u);
  const double c = std::cos(phi), s = std::sin(phi);
  auto integrand = [&](double t) {
    const double x = u * c - t * s, y = u * s + t * c;
    const DiskPoint p{std::min(1.0, std::hypot(x, y)), std::atan2(y, x)};
    double v = 0.0;
    for (const auto& [idx, th] : f.entries())
      if (th != 0.0) v += th * detail::disk_unchecked(idx, p);
    return v;
  };
  // substitute t = half * x so the chord prefactor cancels exactly
  const double integral = Rule::integrate([&](double x) { return integrand(half * x); }, -1.0, 1.0);
  return 0.5 * std::numbers::pi * integral;
}

/// Singular value realised by radon_forward_quadrature on degree m: pi (m+1)^-1/2.
inline double radon_quadrature_singular_value(int m)
{
  return std::numbers::pi / std::sqrt(m + 1.0);
}

} // namespace invprob
