// SPDX-License-Identifier: Apache-2.0
#include "invprob/basis.hpp"
#include "invprob/multi_index.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace invprob;

namespace {

constexpr double pi = std::numbers::pi;

// Uniform rule: exact for trigonometric polynomials of degree below n.
template<class F>
double periodic_mean(F f, int n = 256)
{
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    s += f(static_cast<double>(i) / n);
  return s / n;
}

std::vector<MultiIndex> disk_indices(int max_order, bool with_constant)
{
  return enumerate_indices(with_constant ? BasisFamily::disk_with_constant : BasisFamily::disk, 2, max_order);
}

} // namespace

TEST(MultiIndex, FormatParseRoundTrip)
{
  for (const char* tok : {"0", "3", "2s", "1.0", "1s.2", "0.0.4s", "7.1s.0.2"}) {
    const auto m = parse_index(tok);
    EXPECT_EQ(format_index(m), tok);
  }
  EXPECT_THROW(parse_index(""), InvalidArgument);
  EXPECT_THROW(parse_index("1..2"), InvalidArgument);
  EXPECT_THROW(parse_index("0s"), InvalidArgument);
  EXPECT_THROW(parse_index("x"), InvalidArgument);
  EXPECT_THROW(parse_index("1.2.3.4.5"), InvalidArgument);
}

TEST(MultiIndex, EnumerationCounts)
{
  // trig on [0,1]: the constant plus a cos and a sin per frequency
  EXPECT_EQ(enumerate_indices(BasisFamily::trig, 1, 5).size(), 11u);
  EXPECT_EQ(enumerate_indices(BasisFamily::cosine, 1, 5).size(), 6u);
  for (int m = 0; m <= 6; ++m) {
    EXPECT_EQ(disk_indices(m, true).size(), static_cast<std::size_t>((m + 1) * (m + 2) / 2));
    EXPECT_EQ(disk_indices(m, false).size(), static_cast<std::size_t>((m + 1) * (m + 2) / 2 - 1));
  }
  // d = 2 trig with |j|_1 <= 2: brute count over parities
  int count = 0;
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; a + b <= 2; ++b)
      count += (a ? 2 : 1) * (b ? 2 : 1);
  EXPECT_EQ(enumerate_indices(BasisFamily::trig, 2, 2).size(), static_cast<std::size_t>(count));
}

TEST(MultiIndex, EnumerationIsSortedAndUnique)
{
  const auto idx = enumerate_indices(BasisFamily::trig, 3, 4);
  for (std::size_t i = 1; i < idx.size(); ++i)
    EXPECT_LT(idx[i - 1], idx[i]);
  for (const auto& m : idx) {
    EXPECT_TRUE(m.parity_valid());
    EXPECT_LE(m.order(), 4);
  }
}

TEST(TrigBasis, OrthonormalInOneDimension)
{
  const auto idx = enumerate_indices(BasisFamily::trig, 1, 6);
  for (const auto& a : idx)
    for (const auto& b : idx) {
      const double ip = periodic_mean([&](double x) {
        const double p[] = {x};
        return eval_trig_basis(a, p) * eval_trig_basis(b, p);
      });
      EXPECT_NEAR(ip, a == b ? 1.0 : 0.0, 1e-12) << format_index(a) << " vs " << format_index(b);
    }
}

TEST(TrigBasis, TensorProductInTwoDimensions)
{
  const auto idx = enumerate_indices(BasisFamily::trig, 2, 3);
  const int n = 32;
  for (const auto& a : idx)
    for (const auto& b : idx) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
          const double p[] = {static_cast<double>(i) / n, static_cast<double>(k) / n};
          s += eval_trig_basis(a, p) * eval_trig_basis(b, p);
        }
      EXPECT_NEAR(s / (n * n), a == b ? 1.0 : 0.0, 1e-12);
    }
}

TEST(TrigBasis, ExplicitValues)
{
  const double x[] = {0.125};
  EXPECT_DOUBLE_EQ(eval_trig_basis(parse_index("0"), x), 1.0);
  EXPECT_NEAR(eval_trig_basis(parse_index("1"), x), std::sqrt(2.0) * std::cos(pi / 4), 1e-15);
  EXPECT_NEAR(eval_trig_basis(parse_index("2s"), x), std::sqrt(2.0), 1e-15);
  const double bad[] = {0.1, 0.2};
  EXPECT_THROW(eval_trig_basis(parse_index("1"), bad), InvalidArgument);
}

TEST(ZernikeRadial, MatchesClosedForms)
{
  for (double r : {0.0, 0.17, 0.5, 0.81, 1.0}) {
    const double r2 = r * r;
    EXPECT_NEAR(eval_zernike_radial(0, 0, r), 1.0, 1e-14);
    EXPECT_NEAR(eval_zernike_radial(1, 1, r), r, 1e-14);
    EXPECT_NEAR(eval_zernike_radial(2, 0, r), 2 * r2 - 1, 1e-14);
    EXPECT_NEAR(eval_zernike_radial(2, 2, r), r2, 1e-14);
    EXPECT_NEAR(eval_zernike_radial(3, 1, r), 3 * r2 * r - 2 * r, 1e-14);
    EXPECT_NEAR(eval_zernike_radial(4, 0, r), 6 * r2 * r2 - 6 * r2 + 1, 1e-14);
    EXPECT_NEAR(eval_zernike_radial(4, 2, r), 4 * r2 * r2 - 3 * r2, 1e-14);
    EXPECT_NEAR(eval_zernike_radial(5, 1, r), 10 * std::pow(r, 5) - 12 * r2 * r + 3 * r, 1e-13);
    EXPECT_NEAR(eval_zernike_radial(6, 0, r), 20 * std::pow(r, 6) - 30 * r2 * r2 + 12 * r2 - 1, 1e-13);
  }
  // Z_a^b(1) = 1 for every admissible pair
  for (int a = 0; a <= 20; ++a)
    for (int b = a % 2; b <= a; b += 2)
      EXPECT_NEAR(eval_zernike_radial(a, b, 1.0), 1.0, 1e-10) << a << ' ' << b;
  EXPECT_THROW(eval_zernike_radial(3, 0, 0.5), InvalidArgument);
  EXPECT_THROW(eval_zernike_radial(1, 3, 0.5), InvalidArgument);
}

TEST(ChebyshevU, MatchesTrigonometricForm)
{
  for (int m = 0; m <= 12; ++m)
    for (double t : {0.3, 1.0, 2.2}) {
      const double expect = std::sin((m + 1) * t) / std::sin(t);
      EXPECT_NEAR(eval_chebyshev_U(m, std::cos(t)), expect, 1e-11 * std::max(1.0, std::abs(expect)));
    }
  EXPECT_DOUBLE_EQ(eval_chebyshev_U(7, 1.0), 8.0);
}

TEST(DiskBasis, OrthonormalOnTheDisk)
{
  using Rule = boost::math::quadrature::gauss<double, 30>;
  const auto idx = disk_indices(6, true);
  const int nt = 64;
  for (std::size_t p = 0; p < idx.size(); ++p)
    for (std::size_t q = p; q < idx.size(); ++q) {
      const double ip = Rule::integrate(
        [&](double r) {
          double s = 0.0;
          for (int k = 0; k < nt; ++k) {
            const DiskPoint pt{r, 2 * pi * k / nt};
            s += eval_disk_basis(idx[p], pt, true) * eval_disk_basis(idx[q], pt, true);
          }
          return r * s * 2 * pi / nt;
        },
        0.0, 1.0);
      EXPECT_NEAR(ip, p == q ? 1.0 : 0.0, 1e-12) << format_index(idx[p]) << " vs " << format_index(idx[q]);
    }
}

TEST(DiskBasis, ConstantNeedsTheExtendedFamily)
{
  const auto zero = MultiIndex::of({0, 0});
  EXPECT_THROW(eval_disk_basis(zero, {0.3, 0.1}), InvalidArgument);
  EXPECT_NEAR(eval_disk_basis(zero, {0.3, 0.1}, true), 1.0 / std::sqrt(pi), 1e-15);
  EXPECT_THROW(eval_disk_basis(MultiIndex::scalar(1), {0.3, 0.1}), InvalidArgument);
}

TEST(RadonImageBasis, OrthonormalUnderImageMeasure)
{
  // u = cos t turns sqrt(1-u^2) du into sin^2 t dt on [0, pi/2]
  using Rule = boost::math::quadrature::gauss<double, 40>;
  const auto idx = disk_indices(6, false);
  const int nphi = 64;
  for (std::size_t p = 0; p < idx.size(); ++p)
    for (std::size_t q = p; q < idx.size(); ++q) {
      const double ip = Rule::integrate(
        [&](double t) {
          const double u = std::cos(t);
          double s = 0.0;
          for (int k = 0; k < nphi; ++k) {
            const RadonPoint pt{u, 2 * pi * k / nphi};
            s += eval_radon_image_basis(idx[p], pt) * eval_radon_image_basis(idx[q], pt);
          }
          return (2.0 / pi) * std::sin(t) * std::sin(t) * s * 2 * pi / nphi;
        },
        0.0, pi / 2);
      EXPECT_NEAR(ip, p == q ? 1.0 : 0.0, 1e-12) << format_index(idx[p]) << " vs " << format_index(idx[q]);
    }
}

TEST(RadonImageBasis, MeasureHasMassPi)
{
  using Rule = boost::math::quadrature::gauss<double, 40>;
  const double mass = 2 * pi * Rule::integrate([](double u) { return radon_measure_density(u); }, 0.0, 1.0);
  // the integrand has a square-root endpoint, so Gauss-Legendre converges slowly
  EXPECT_NEAR(mass, pi, 1e-4);
  EXPECT_DOUBLE_EQ(radon_measure_density(1.0), 0.0);
  EXPECT_DOUBLE_EQ(radon_measure_density(0.0), 2.0 / pi);
}
