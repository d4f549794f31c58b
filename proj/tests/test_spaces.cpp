// SPDX-License-Identifier: Apache-2.0
#include "invprob/coefficients.hpp"
#include "invprob/ellipsoid.hpp"
#include "invprob/net.hpp"
#include "invprob/packing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace invprob;

namespace {

std::vector<double> column(const std::vector<double>& v, std::size_t from, std::size_t len)
{
  return {v.begin() + static_cast<long>(from), v.begin() + static_cast<long>(from + len)};
}

double sq_dist(std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

} // namespace

TEST(CoefficientVector, ArithmeticAndRisk)
{
  CoefficientVector a(BasisFamily::trig), b(BasisFamily::trig);
  a.set(parse_index("1"), 2.0);
  a.set(parse_index("2s"), -1.0);
  b.set(parse_index("1"), 0.5);
  b.set(parse_index("3"), 4.0);
  EXPECT_DOUBLE_EQ(a.norm_sq(), 5.0);
  EXPECT_DOUBLE_EQ(dot(a, b), 1.0);
  EXPECT_DOUBLE_EQ(distance_sq(a, b), 1.5 * 1.5 + 1.0 + 16.0);
  EXPECT_DOUBLE_EQ((a + b).get(parse_index("3")), 4.0);
  EXPECT_DOUBLE_EQ((2.0 * a).get(parse_index("2s")), -2.0);
  EXPECT_EQ(a.max_order(), 2);
  // gamma(theta) = ||theta - z||^2 - ||z||^2
  const std::vector<double> th{1.0, -2.0, 0.5}, z{0.3, 0.7, -1.1};
  const double expect = sq_dist(th, z) - (0.09 + 0.49 + 1.21);
  EXPECT_NEAR(quadratic_risk(th, z), expect, 1e-14);
}

TEST(Ellipsoid, SobolevWeights)
{
  const auto e = Ellipsoid::sobolev(BasisFamily::trig, 1, 2.0, 1.0, 3.0);
  EXPECT_DOUBLE_EQ(e.weight(parse_index("0")), 3.0);
  EXPECT_DOUBLE_EQ(e.weight(parse_index("1s")), 3.0);
  EXPECT_DOUBLE_EQ(e.weight(parse_index("4")), 48.0);
  const auto e2 = Ellipsoid::sobolev(BasisFamily::trig, 2, 1.5, 1.0);
  EXPECT_NEAR(e2.weight(parse_index("1.3")), std::pow(4.0, 1.5), 1e-12);
}

TEST(Ellipsoid, RejectsInvalidParameters)
{
  EXPECT_THROW(Ellipsoid::sobolev(BasisFamily::trig, 1, 0.0, 1.0), InvalidArgument);
  EXPECT_THROW(Ellipsoid::sobolev(BasisFamily::trig, 1, 1.0, -1.0), InvalidArgument);
  EXPECT_THROW(Ellipsoid::sobolev(BasisFamily::trig, 5, 1.0, 1.0), InvalidArgument);
  Ellipsoid::Params p;
  p.c1 = 1.0;
  p.c2 = 2.0;
  p.overrides[parse_index("2")] = 100.0; // envelope at |j| = 2, s = 1 is [2, 4]
  EXPECT_THROW(Ellipsoid{p}, InvalidArgument);
  p.overrides[parse_index("2")] = 3.0;
  EXPECT_NO_THROW(Ellipsoid{p});
}

TEST(Ellipsoid, ContainsAndNorm)
{
  const auto e = Ellipsoid::sobolev(BasisFamily::trig, 1, 1.0, 2.0);
  CoefficientVector t(BasisFamily::trig);
  t.set(parse_index("1"), 1.0);
  t.set(parse_index("2"), 0.5);
  EXPECT_DOUBLE_EQ(e.weighted_norm_sq(t), 2.0);
  EXPECT_TRUE(e.contains(t));
  t.set(parse_index("2"), 1.0);
  EXPECT_DOUBLE_EQ(e.weighted_norm_sq(t), 5.0);
  EXPECT_FALSE(e.contains(t));
}

TEST(Ellipsoid, TruncationLevel)
{
  // M = floor((sqrt2 L / (C1 delta))^(1/s))
  const auto e = Ellipsoid::sobolev(BasisFamily::trig, 1, 2.0, 1.0);
  for (double delta : {0.4, 0.2, 0.1, 0.05, 0.01}) {
    const int M = truncation_level(e, delta);
    EXPECT_EQ(M, static_cast<int>(std::floor(std::sqrt(std::sqrt(2.0) / delta))));
    // tail mass bound: sup over the class of sum_{|j| > M} theta^2 is L^2 / a_{M+1}^2
    EXPECT_LE(1.0 / std::pow(M + 1.0, 4.0), delta * delta / 2.0);
  }
  EXPECT_THROW(truncation_level(e, 2.0), InvalidArgument);
  EXPECT_THROW(truncation_level(e, 0.0), InvalidArgument);
  EXPECT_THROW(truncation_level(e, 1e-12), ResourceError);
}

TEST(Ellipsoid, UniformSamplesStayInside)
{
  const auto e = Ellipsoid::sobolev(BasisFamily::trig, 1, 1.5, 1.3);
  const auto coords = e.coordinates(6);
  const auto a = e.weights(coords);
  std::mt19937_64 rng(5);
  double mean_r2 = 0.0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    const auto th = sample_uniform_ellipsoid(e, coords, rng);
    const double w = weighted_norm_sq(a, th);
    EXPECT_LE(w, 1.3 * 1.3 * (1 + 1e-12));
    mean_r2 += w / (1.3 * 1.3);
  }
  // for a uniform point in the m-ball, E[r^2] = m / (m + 2)
  const double m = static_cast<double>(coords.size());
  EXPECT_NEAR(mean_r2 / reps, m / (m + 2), 0.01);
}

TEST(LatticeNet, StepAndLevel)
{
  const auto e = Ellipsoid::sobolev(BasisFamily::cosine, 1, 1.0, 1.0);
  const auto net = LatticeNet::build(e, 0.2);
  EXPECT_EQ(net.truncation_level(), 7);
  EXPECT_EQ(net.dimension(), 8u);
  EXPECT_DOUBLE_EQ(net.step(), 0.2 / (2.0 * std::sqrt(8.0)));
  for (std::size_t i = 0; i < net.dimension(); ++i) {
    const double h = net.step() * static_cast<double>(net.max_steps()[i]);
    EXPECT_LE(net.weights()[i] * h, 1.0);
    EXPECT_GT(net.weights()[i] * (h + net.step()), 1.0);
  }
}

TEST(LatticeNet, CountMatchesEnumerationAndBounds)
{
  for (double delta : {0.6, 0.4, 0.3}) {
    const auto e = Ellipsoid::sobolev(BasisFamily::cosine, 1, 1.0, 1.0);
    const auto net = LatticeNet::build(e, delta);
    const auto count = net.exact_count(1u << 22);
    ASSERT_TRUE(count.has_value());
    const auto pts = net.enumerate(1u << 22);
    EXPECT_EQ(pts.size(), *count * net.dimension());
    // brute-force count over the bounding box
    std::uint64_t brute = 0;
    std::vector<long> k(net.dimension());
    for (std::size_t i = 0; i < k.size(); ++i)
      k[i] = -net.max_steps()[i];
    for (;;) {
      std::vector<double> th(k.size());
      for (std::size_t i = 0; i < k.size(); ++i)
        th[i] = net.step() * static_cast<double>(k[i]);
      if (net.within(th)) ++brute;
      std::size_t i = 0;
      while (i < k.size() && ++k[i] > net.max_steps()[i]) {
        k[i] = -net.max_steps()[i];
        ++i;
      }
      if (i == k.size()) break;
    }
    EXPECT_EQ(brute, *count);
    const auto lc = net.log_cardinality();
    const double exact = std::log(static_cast<double>(*count));
    EXPECT_LE(lc.lower, exact + 1e-9);
    EXPECT_GE(lc.upper, exact - 1e-9);
    EXPECT_LT(lc.upper - lc.lower, 0.05);
  }
}

TEST(LatticeNet, CoversTheEllipsoid)
{
  // every class member lies within delta of the net
  const auto e = Ellipsoid::sobolev(BasisFamily::cosine, 1, 1.0, 1.0);
  const double delta = 0.3;
  const auto net = LatticeNet::build(e, delta);
  const auto wide = e.coordinates(60);
  std::mt19937_64 rng(11);
  for (int r = 0; r < 200; ++r) {
    const auto th = sample_uniform_ellipsoid(e, wide, rng);
    const auto head = column(th, 0, net.dimension());
    double tail = 0.0;
    for (std::size_t i = net.dimension(); i < th.size(); ++i)
      tail += th[i] * th[i];
    const auto near = net.nearest(head);
    EXPECT_TRUE(net.within(near.theta));
    EXPECT_LE(sq_dist(near.theta, head) + tail, delta * delta);
    // the toward-zero rounding is itself a net point within delta / 2
    const auto rounded = net.round_toward_zero(head);
    EXPECT_TRUE(net.within(rounded));
    EXPECT_LE(sq_dist(rounded, head), 0.25 * delta * delta + 1e-15);
  }
}

TEST(LatticeNet, NearestMatchesExhaustiveSearch)
{
  const auto e = Ellipsoid::sobolev(BasisFamily::trig, 1, 1.0, 1.0);
  const auto net = build_delta_net(e, 0.6);
  const auto lattice = LatticeNet::build(e, 0.6);
  ASSERT_GT(net.size(), 10u);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.6);
  for (int r = 0; r < 100; ++r) {
    std::vector<double> z(net.dimension());
    for (auto& v : z)
      v = g(rng);
    double best = 1e300;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < net.size(); ++i) {
      const double risk = quadratic_risk(net.point(i), z);
      if (risk < best) {
        best = risk;
        arg = i;
      }
    }
    const auto near = lattice.nearest(z);
    EXPECT_EQ(near.risk, best);
    const auto p = net.point(arg);
    EXPECT_EQ(near.theta, std::vector<double>(p.begin(), p.end()));
  }
}

TEST(LatticeNet, MaterializationRespectsTheCap)
{
  const auto e = Ellipsoid::sobolev(BasisFamily::trig, 1, 1.0, 1.0);
  EXPECT_THROW(build_delta_net(e, 0.05, 1000), ResourceError);
  try {
    build_delta_net(e, 0.05, 1000);
  } catch (const ResourceError& err) {
    EXPECT_NE(std::string(err.what()).find("use delta >="), std::string::npos);
  }
}

TEST(LatticeNet, CardinalityExponent)
{
  // log #net grows like delta^(-d/s)
  const auto e = Ellipsoid::sobolev(BasisFamily::cosine, 1, 2.0, 4.0);
  const std::vector<double> deltas{0.4, 0.2, 0.1, 0.05};
  const auto fit = net_cardinality_exponent(e, deltas);
  EXPECT_GT(fit.slope, 0.5 - 0.1);
  EXPECT_LT(fit.slope, 0.5 + 0.35);
  const std::vector<double> one{0.4};
  EXPECT_THROW(net_cardinality_exponent(e, one), InvalidArgument);
}

TEST(Packing, VarshamovGilbertDistance)
{
  for (std::size_t len : {8u, 15u, 40u, 100u}) {
    const std::size_t dmin = (len + 3) / 4;
    const auto code = varshamov_gilbert_code(len, dmin);
    ASSERT_GE(code.words.size(), 2u);
    for (std::size_t i = 0; i < code.words.size(); ++i)
      for (std::size_t j = i + 1; j < code.words.size(); ++j)
        EXPECT_GE(detail::hamming(code.words[i], code.words[j]), dmin);
    // Gilbert bound: 2^len / V(len, dmin - 1) words for the full lexicode
    if (len <= 20) {
      double vol = 0.0, binom = 1.0;
      for (std::size_t k = 0; k < dmin; ++k) {
        vol += binom;
        binom = binom * static_cast<double>(len - k) / static_cast<double>(k + 1);
      }
      EXPECT_GE(static_cast<double>(code.words.size()), std::ldexp(1.0, static_cast<int>(len)) / vol);
    }
  }
}

TEST(Packing, SeparationAndMembership)
{
  const auto e = Ellipsoid::sobolev(BasisFamily::trig, 1, 1.0, 1.0);
  const double delta = 0.1;
  const auto pack = build_packing_set(e, delta, CoefficientVector(BasisFamily::trig));
  ASSERT_GE(pack.size(), 2u);
  const auto a = e.weights(pack.coords);
  for (std::size_t i = 0; i < pack.size(); ++i) {
    EXPECT_LE(weighted_norm_sq(a, pack.point(i)), 1.0 + 1e-12);
    for (std::size_t j = i + 1; j < pack.size(); ++j) {
      const double d = std::sqrt(sq_dist(pack.point(i), pack.point(j)));
      EXPECT_GE(d, pack.c0 * delta * (1 - 1e-12));
      EXPECT_LE(d, pack.c * delta * (1 + 1e-12));
    }
  }
  EXPECT_THROW(build_packing_set(e, 2.0, CoefficientVector(BasisFamily::trig)), InvalidArgument);
}
