// SPDX-License-Identifier: Apache-2.0
#include "invprob/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace invprob;

TEST(FormatDouble, RoundTripsExactly)
{
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(u(rng), static_cast<int>(i % 200) - 100);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(parse_double(format_double(0.1)), 0.1);
  EXPECT_EQ(parse_double(format_double(std::numeric_limits<double>::denorm_min())),
            std::numeric_limits<double>::denorm_min());
  EXPECT_THROW(parse_double("1.5x"), InvalidArgument);
  EXPECT_THROW(parse_double(""), InvalidArgument);
}

TEST(NetText, WriteReadRoundTrip)
{
  const auto e = Ellipsoid::sobolev(BasisFamily::trig, 2, 1.0, 1.0);
  const auto net = build_delta_net(e, 1.0);
  std::stringstream ss;
  write_net(ss, net);
  const auto back = read_net(ss, BasisFamily::trig);
  EXPECT_EQ(back.coords, net.coords);
  EXPECT_EQ(back.data, net.data);
  EXPECT_EQ(back.delta, net.delta);
  EXPECT_EQ(back.truncation_level, net.truncation_level);
}

TEST(NetText, HeaderFormat)
{
  Net net;
  net.coords = {parse_index("1"), parse_index("1s")};
  net.data = {0.5, -0.25};
  net.delta = 0.1;
  net.truncation_level = 3;
  std::stringstream ss;
  write_net(ss, net);
  EXPECT_EQ(ss.str(), "# delta=0.10000000000000001 M=3 count=1\n1:0.5 1s:-0.25\n");
}

TEST(NetText, RejectsMalformedInput)
{
  auto parse = [](const std::string& s) {
    std::istringstream is(s);
    return read_net(is);
  };
  EXPECT_THROW(parse(""), InvalidArgument);
  EXPECT_THROW(parse("delta=0.1 M=1 count=1\n1:0.5\n"), InvalidArgument);
  EXPECT_THROW(parse("# delta=0.1 count=1\n1:0.5\n"), InvalidArgument);
  EXPECT_THROW(parse("# delta=0.1 M=1 count=2\n1:0.5\n"), InvalidArgument);
  EXPECT_THROW(parse("# delta=0.1 M=1 count=2\n1:0.5\n2:0.5\n"), InvalidArgument);
  EXPECT_THROW(parse("# delta=0.1 M=1 count=1\n1=0.5\n"), InvalidArgument);
  EXPECT_THROW(parse("# delta=0.1 M=1 count=1\n1:abc\n"), InvalidArgument);
  EXPECT_NO_THROW(parse("# delta=0.1 M=1 count=2\n1:0.5 2:0\n1:0 2:0.25\n"));
}

TEST(EstimateText, SinglePoint)
{
  CoefficientVector v(BasisFamily::trig);
  v.set(parse_index("0"), 1.0);
  v.set(parse_index("2s"), 0.125);
  std::stringstream ss;
  write_estimate(ss, v, 0.2, 4);
  EXPECT_EQ(ss.str(), "# delta=0.20000000000000001 M=4 count=1\n0:1 2s:0.125\n");
}

TEST(Csv, WhiteNoiseAndSamples)
{
  WhiteNoiseObservation obs;
  obs.coords = {parse_index("0"), parse_index("1s")};
  obs.z = {0.5, -1.0};
  std::stringstream a;
  write_white_noise_csv(a, obs);
  EXPECT_EQ(a.str(), "index,z\n0,0.5\n1s,-1\n");

  SampleObservation s;
  s.dim = 2;
  s.data = {0.25, 1.5, 0.75, 3.0};
  std::stringstream b, c;
  write_sample_csv(b, s, true);
  EXPECT_EQ(b.str(), "u,phi\n0.25,1.5\n0.75,3\n");
  write_sample_csv(c, s, false);
  EXPECT_EQ(c.str(), "y1,y2\n0.25,1.5\n0.75,3\n");
}

TEST(Csv, RateTable)
{
  const std::vector<double> ns{256, 1024}, m{0.5, 0.25}, se{0.01, 0.005};
  std::stringstream ss;
  write_rate_csv(ss, ns, m, se);
  EXPECT_EQ(ss.str(), "n,mise,stderr\n256,0.5,0.01\n1024,0.25,0.0050000000000000001\n");
}
