// SPDX-License-Identifier: Apache-2.0
#include "invprob/estimators.hpp"
#include "invprob/models.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace invprob;

namespace {

constexpr double pi = std::numbers::pi;

struct Moments
{
  double mean = 0.0;
  double se = 0.0;
};

template<class F>
Moments sample_moments(std::size_t n, F f)
{
  double s = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = f(i);
    s += v;
    ss += v * v;
  }
  const double m = s / n;
  return {m, std::sqrt((ss / n - m * m) / (n - 1.0))};
}

} // namespace

TEST(WhiteNoise, MomentsMatchTheModel)
{
  // z_j ~ N(theta_j, 1 / (n b_j^2))
  const auto op = SvdOperator::convolution(1, 1.0, 0.5);
  const auto coords = enumerate_indices(BasisFamily::trig, 1, 3);
  CoefficientVector theta(BasisFamily::trig);
  theta.set(parse_index("1"), 0.4);
  theta.set(parse_index("3s"), -0.2);
  std::vector<double> inv_b;
  for (const auto& c : coords)
    inv_b.push_back(op.inverse_singular_value(c));
  const double n = 100.0;
  const std::size_t reps = 10000;
  std::vector<std::vector<double>> zs(coords.size(), std::vector<double>(reps));
  for (std::size_t r = 0; r < reps; ++r) {
    const auto obs = simulate_white_noise(theta, coords, inv_b, n, derive_seed(17, r));
    for (std::size_t k = 0; k < coords.size(); ++k)
      zs[k][r] = obs.z[k];
  }
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const double var = inv_b[k] * inv_b[k] / n;
    const auto m = sample_moments(reps, [&](std::size_t r) { return zs[k][r]; });
    EXPECT_NEAR(m.mean, theta.get(coords[k]), 3.0 * std::sqrt(var / reps)) << format_index(coords[k]);
    const auto v = sample_moments(reps, [&](std::size_t r) {
      const double d = zs[k][r] - theta.get(coords[k]);
      return d * d;
    });
    EXPECT_NEAR(v.mean, var, 3.0 * v.se) << format_index(coords[k]);
  }
}

TEST(WhiteNoise, NoiselessAndDeterministic)
{
  const auto e = Ellipsoid::sobolev(BasisFamily::trig, 1, 2.0, 1.0);
  const auto op = SvdOperator::convolution(1, 1.0);
  const auto truth = default_decaying_truth(e, 8);
  const auto coords = e.coordinates(10);
  const auto clean = simulate_white_noise(truth, op, coords, std::numeric_limits<double>::infinity(), 3);
  for (std::size_t k = 0; k < coords.size(); ++k)
    EXPECT_EQ(clean.z[k], truth.theta.get(coords[k]));
  const auto a = simulate_white_noise(truth, op, coords, 50.0, 99);
  const auto b = simulate_white_noise(truth, op, coords, 50.0, 99);
  EXPECT_EQ(a.z, b.z);
  const auto c = simulate_white_noise(truth, op, coords, 50.0, 100);
  EXPECT_NE(a.z, c.z);
  const auto short_coords = e.coordinates(3);
  EXPECT_THROW(simulate_white_noise(truth, op, short_coords, 50.0, 1), InvalidArgument);
  EXPECT_THROW(simulate_white_noise(truth, op, coords, 0.5, 1), InvalidArgument);
}

TEST(Truth, DecayingTruthFillsTheBall)
{
  for (int d : {1, 2}) {
    const auto e = Ellipsoid::sobolev(BasisFamily::trig, d, 2.0, 1.5);
    const auto t = default_decaying_truth(e, 16, 0.9);
    EXPECT_NEAR(std::sqrt(e.weighted_norm_sq(t.theta)), 0.9 * 1.5, 1e-12);
    EXPECT_EQ(t.theta.max_order(), 16);
    EXPECT_NO_THROW(validate_truth(t, SvdOperator::convolution(d, 1.0), false));
  }
  const auto disk = Ellipsoid::sobolev(BasisFamily::disk, 2, 2.0, 1.0);
  EXPECT_NO_THROW(validate_truth(default_decaying_truth(disk, 10), SvdOperator::radon2d(), false));
}

TEST(Truth, DensityValidation)
{
  const auto op = SvdOperator::convolution(1, 1.0);
  const auto e = Ellipsoid::sobolev(BasisFamily::trig, 1, 2.0, 2.0);
  const auto t = default_density_truth(e, op);
  const auto diag = validate_truth(t, op, true);
  EXPECT_NEAR(diag.integral, 1.0, 1e-12);
  EXPECT_GE(diag.min_Af, 0.7 - 1e-12);
  EXPECT_LE(diag.max_Af, 1.3 + 1e-12);

  TruthSpec bad = t;
  bad.theta.set(parse_index("1"), 0.8); // Af = 1 + 0.8 sqrt2 cos dips below zero
  bad.ellipsoid = Ellipsoid::sobolev(BasisFamily::trig, 1, 2.0, 10.0);
  EXPECT_THROW(validate_truth(bad, op, true), InvalidArgument);
  TruthSpec unnormalized = t;
  unnormalized.theta.set(parse_index("0"), 1.2);
  unnormalized.ellipsoid = bad.ellipsoid;
  EXPECT_THROW(validate_truth(unnormalized, op, true), InvalidArgument);

  // the constant sits on the boundary of the unit ball, so L = 1 has no room
  EXPECT_THROW(default_density_truth(Ellipsoid::sobolev(BasisFamily::trig, 1, 2.0, 1.0), op), InvalidArgument);
}

TEST(DensitySampling, EmpiricalCoefficientsAreUnbiased)
{
  // E psi_j(Y) = b_j theta_j, so E[empirical coefficient] = theta_j
  const auto op = SvdOperator::convolution(1, 1.0);
  const auto e = Ellipsoid::sobolev(BasisFamily::trig, 1, 2.0, 2.0);
  const auto t = default_density_truth(e, op);
  const std::size_t n = 40000;
  const auto obs = sample_density(t, op, n, 5);
  ASSERT_EQ(obs.n(), n);
  for (const auto& idx : e.coordinates(3)) {
    const auto m = sample_moments(n, [&](std::size_t i) { return op.image_basis(idx, obs.point(i)); });
    EXPECT_NEAR(m.mean, op.singular_value(idx) * t.theta.get(idx), 4.0 * m.se) << format_index(idx);
  }
}

TEST(DensitySampling, TomographyDrawsLieInTheImageDomain)
{
  const auto op = SvdOperator::tomography2d();
  const auto e = Ellipsoid::sobolev(BasisFamily::disk_with_constant, 2, 2.0, 2.0);
  const auto t = default_density_truth(e, op);
  const std::size_t n = 20000;
  const auto obs = sample_tomography(t, n, 8);
  ASSERT_EQ(obs.dim, 2);
  for (std::size_t i = 0; i < obs.n(); ++i)
    ASSERT_TRUE(op.in_image_domain(obs.point(i)));
  for (const auto& idx : e.coordinates(2)) {
    const auto m = sample_moments(n, [&](std::size_t i) { return op.image_basis(idx, obs.point(i)); });
    // under nu / pi the constant psi_00 = pi^-1/2 has mean b_00 theta_00 = pi^-1/2
    EXPECT_NEAR(m.mean, op.singular_value(idx) * t.theta.get(idx), 4.0 * m.se + 1e-12) << format_index(idx);
  }
  // u-marginal density (4/pi) sqrt(1-u^2) has mean 4 / (3 pi)
  const auto u = sample_moments(n, [&](std::size_t i) { return obs.point(i)[0]; });
  EXPECT_NEAR(u.mean, 4.0 / (3.0 * pi), 4.0 * u.se);
}

TEST(DensitySampling, Deterministic)
{
  const auto op = SvdOperator::convolution(1, 1.0);
  const auto t = default_density_truth(Ellipsoid::sobolev(BasisFamily::trig, 1, 2.0, 2.0), op);
  EXPECT_EQ(sample_density(t, op, 100, 4).data, sample_density(t, op, 100, 4).data);
  EXPECT_THROW(sample_density(t, op, 0, 4), InvalidArgument);
}
