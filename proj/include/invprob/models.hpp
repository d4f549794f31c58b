// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/coefficients.hpp"
#include "invprob/ellipsoid.hpp"
#include "invprob/errors.hpp"
#include "invprob/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace invprob {

/// Simulation ground truth f, its class, and (density mode) a floor for Af.
struct TruthSpec
{
  CoefficientVector theta;
  Ellipsoid ellipsoid;
  double positivity_margin = 0.0;
};

/// Sufficient statistics z_j of the white noise record, aligned with `coords`.
struct WhiteNoiseObservation
{
  BasisFamily family = BasisFamily::trig;
  std::vector<MultiIndex> coords;
  std::vector<double> z;
  double n = 0.0;
  std::uint64_t seed = 0;

  CoefficientVector stats() const { return CoefficientVector::from_dense(family, coords, z); }
};

/// i.i.d. image-space points, stored row-major with `dim` values per point.
struct SampleObservation
{
  int dim = 1;
  std::vector<double> data;
  std::uint64_t seed = 0;

  std::size_t n() const { return data.size() / static_cast<std::size_t>(dim); }
  std::span<const double> point(std::size_t i) const { return {data.data() + i * dim, static_cast<std::size_t>(dim)}; }
};

/// Check grid over the image domain (about 10^4 points).
inline std::vector<std::vector<double>> image_check_grid(const SvdOperator& op)
{
  std::vector<std::vector<double>> grid;
  const int d = op.image_dim();
  if (op.kind() == OperatorKind::convolution && d == 1) {
    for (int i = 0; i <= 10000; ++i)
      grid.push_back({i / 10000.0});
    return grid;
  }
  const int per_axis = d == 2 ? 100 : (d == 3 ? 22 : 10);
  std::vector<int> ctr(d, 0);
  for (;;) {
    std::vector<double> y(d);
    for (int k = 0; k < d; ++k) {
      const double t = ctr[k] / static_cast<double>(per_axis);
      y[k] = t;
    }
    if (op.kind() != OperatorKind::convolution) {
      y[0] = ctr[0] / static_cast<double>(per_axis - 1);
      y[1] = 2.0 * std::numbers::pi * ctr[1] / per_axis;
    }
    grid.push_back(std::move(y));
    int k = 0;
    while (k < d && ++ctr[k] == per_axis)
      ctr[k++] = 0;
    if (k == d) break;
  }
  return grid;
}

/// Af evaluated through the singular expansion.
inline double eval_Af(const SvdOperator& op, const CoefficientVector& image_coeffs, std::span<const double> y)
{
  return eval_image_function(op, image_coeffs, y);
}

/// Integral of Af under nu, exact in coefficient space.
inline double integral_Af(const SvdOperator& op, const CoefficientVector& theta)
{
  double s = 0.0;
  for (const auto& [idx, v] : theta.entries())
    s += op.singular_value(idx) * v * image_basis_integral(op, idx);
  return s;
}

/// Diagnostics recorded on a validated truth.
struct TruthDiagnostics
{
  double min_Af = 0.0;
  double max_Af = 0.0;
  double integral = 0.0;
  double l2_norm = 0.0;
};

/// Throws when the truth leaves its class or, in density mode, is not a
/// positive normalized density on the check grid.
inline TruthDiagnostics validate_truth(const TruthSpec& t, const SvdOperator& op, bool density_mode)
{
  detail::require(t.theta.all_finite(), "truth: non-finite coefficient");
  detail::require(t.ellipsoid.contains(t.theta), "truth: coefficients lie outside the ellipsoid");
  for (const auto& [idx, v] : t.theta.entries())
    op.check_index(idx);
  TruthDiagnostics d;
  d.l2_norm = t.theta.norm();
  if (!density_mode) return d;
  const auto img = apply_A(op, t.theta);
  d.min_Af = std::numeric_limits<double>::infinity();
  d.max_Af = -std::numeric_limits<double>::infinity();
  for (const auto& y : image_check_grid(op)) {
    const double v = eval_Af(op, img, y);
    d.min_Af = std::min(d.min_Af, v);
    d.max_Af = std::max(d.max_Af, v);
  }
  d.integral = integral_Af(op, t.theta);
  detail::require(t.positivity_margin > 0.0, "truth: density mode needs a positive margin");
  if (d.min_Af < t.positivity_margin)
    throw InvalidArgument("truth: Af drops to " + std::to_string(d.min_Af) + ", below the positivity margin "
                          + std::to_string(t.positivity_margin));
  if (std::abs(d.integral - 1.0) > 1e-8)
    throw InvalidArgument("truth: Af integrates to " + std::to_string(d.integral) + " instead of 1");
  return d;
}

/// z_j = theta_j + n^-1/2 inv_b_j eps_j over `coords`; n = infinity is noiseless.
inline WhiteNoiseObservation simulate_white_noise(const CoefficientVector& theta,
                                                  std::span<const MultiIndex> coords,
                                                  std::span<const double> inv_b,
                                                  double n,
                                                  std::uint64_t seed)
{
  detail::require(n >= 1.0, "simulate_white_noise: n must be at least 1");
  detail::require(coords.size() == inv_b.size(), "simulate_white_noise: size mismatch");
  for (const auto& [idx, v] : theta.entries())
    if (v != 0.0)
      detail::require(std::binary_search(coords.begin(), coords.end(), idx),
                      "simulate_white_noise: truncation misses truth index " + format_index(idx));
  WhiteNoiseObservation obs;
  obs.family = theta.family();
  obs.coords.assign(coords.begin(), coords.end());
  obs.n = n;
  obs.seed = seed;
  obs.z.resize(coords.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double scale = std::isinf(n) ? 0.0 : 1.0 / std::sqrt(n);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const double eps = normal(rng);
    obs.z[i] = theta.get(coords[i]) + scale * inv_b[i] * eps;
  }
  return obs;
}

inline WhiteNoiseObservation simulate_white_noise(const TruthSpec& truth,
                                                  const SvdOperator& op,
                                                  std::span<const MultiIndex> coords,
                                                  double n,
                                                  std::uint64_t seed)
{
  std::vector<double> inv_b(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i)
    inv_b[i] = op.inverse_singular_value(coords[i]);
  return simulate_white_noise(truth.theta, coords, inv_b, n, seed);
}

namespace detail {

// Draw from nu normalized to a probability measure.
template<class Rng>
void propose_image_point(const SvdOperator& op, Rng& rng, std::span<double> y)
{
  std::uniform_real_distribution<double> unif;
  if (op.kind() == OperatorKind::convolution) {
    for (auto& v : y)
      v = unif(rng);
    return;
  }
  // u-marginal of a uniform point in the quarter disk has density ~ sqrt(1-u^2)
  for (;;) {
    const double a = unif(rng), b = unif(rng);
    if (a * a + b * b <= 1.0) {
      y[0] = a;
      break;
    }
  }
  y[1] = 2.0 * std::numbers::pi * unif(rng);
}

} // namespace detail

/// n i.i.d. draws from the density Af with respect to nu by rejection sampling.
inline SampleObservation sample_density(const TruthSpec& truth, const SvdOperator& op, std::size_t n, std::uint64_t seed)
{
  detail::require(n >= 1, "sample_density: n must be at least 1");
  const auto diag = validate_truth(truth, op, true);
  const double envelope = 1.05 * diag.max_Af;
  const auto img = apply_A(op, truth.theta);
  SampleObservation obs;
  obs.dim = op.image_dim();
  obs.seed = seed;
  obs.data.reserve(n * obs.dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif;
  std::vector<double> y(obs.dim);
  while (obs.n() < n) {
    detail::propose_image_point(op, rng, y);
    const double v = eval_Af(op, img, y);
    if (v > envelope)
      throw NumericalError("sample_density: Af = " + std::to_string(v) + " exceeds the rejection envelope "
                           + std::to_string(envelope) + "; the check grid missed the supremum");
    if (unif(rng) * envelope <= v) obs.data.insert(obs.data.end(), y.begin(), y.end());
  }
  return obs;
}

/// Line samples (u, phi) of a density on the disk observed through tomography.
inline SampleObservation sample_tomography(const TruthSpec& truth, std::size_t n, std::uint64_t seed)
{
  detail::require(n >= 1, "sample_tomography: n must be at least 1");
  return sample_density(truth, SvdOperator::tomography2d(), n, seed);
}

/// theta_j proportional to max(|j|,1)^-(s + d/2 + tau) on 1 <= |j| <= support,
/// scaled to weighted norm fill * L.
inline TruthSpec default_decaying_truth(const Ellipsoid& e, int support = 64, double fill = 0.9, double tau = 0.25)
{
  TruthSpec t;
  t.ellipsoid = e;
  t.theta = CoefficientVector(e.family());
  const int d = e.family() == BasisFamily::cosine ? 1 : e.dim();
  for (const auto& idx : e.coordinates(support, 1))
    t.theta.set(idx, std::pow(static_cast<double>(idx.order()), -(e.s() + 0.5 * d + tau)));
  const double scale = fill * e.radius() / std::sqrt(e.weighted_norm_sq(t.theta));
  t.theta = scale * t.theta;
  return t;
}

/// Uniform density plus a small smooth perturbation on |j| <= 2, keeping Af
/// at least (1 - amplitude) times its mean level.
inline TruthSpec default_density_truth(const Ellipsoid& e, const SvdOperator& op, double amplitude = 0.3)
{
  TruthSpec t;
  t.ellipsoid = e;
  t.theta = CoefficientVector(op.family());
  MultiIndex zero;
  zero.dim = static_cast<std::uint8_t>(op.kind() == OperatorKind::convolution ? op.dim() : 2);
  const double total = op.image_measure_total();
  const double level = 1.0 / total; // constant density under nu
  // theta_0 chosen so b_0 theta_0 psi_0 = level
  const double psi0 = op.kind() == OperatorKind::convolution ? 1.0 : std::numbers::inv_sqrtpi;
  t.theta.set(zero, level / (op.singular_value(zero) * psi0));
  std::vector<MultiIndex> pert;
  for (const auto& idx : e.coordinates(2, 1))
    if (op.kind() == OperatorKind::convolution || idx.is_zero() == false) pert.push_back(idx);
  // sup |psi_j| bounds the perturbation of Af
  double sup_sum = 0.0;
  for (const auto& idx : pert) {
    const double sup_psi = op.kind() == OperatorKind::convolution ? std::pow(std::numbers::sqrt2, idx.dim)
                                                                  : std::numbers::inv_sqrtpi * (idx.order() + 1) * std::numbers::sqrt2;
    sup_sum += sup_psi / (idx.order() * idx.order());
  }
  double c = amplitude * level / sup_sum;
  // shrink further if the perturbation would leave the ellipsoid
  auto build = [&](double cc) {
    CoefficientVector v = t.theta;
    for (const auto& idx : pert)
      v.set(idx, cc / (idx.order() * idx.order()) / op.singular_value(idx));
    return v;
  };
  detail::require(e.weighted_norm_sq(t.theta) < e.radius() * e.radius(),
                  "default_density_truth: the uniform density lies outside the ellipsoid; increase L");
  while (e.weighted_norm_sq(build(c)) > e.radius() * e.radius())
    c *= 0.5;
  t.theta = build(c);
  t.positivity_margin = 0.5 * (1.0 - amplitude) * level;
  return t;
}

} // namespace invprob
