// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/coefficients.hpp"
#include "invprob/errors.hpp"
#include "invprob/models.hpp"
#include "invprob/multi_index.hpp"
#include "invprob/net.hpp"
#include "invprob/packing.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace invprob {

/// Shortest form that round-trips a double (17 significant digits).
inline std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s)
{
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) throw InvalidArgument("not a number: '" + s + "'");
  return v;
}

namespace detail {

template<class PointAt>
void write_point_lines(std::ostream& os,
                       double delta,
                       int level,
                       std::span<const MultiIndex> coords,
                       std::size_t count,
                       PointAt point)
{
  os << "# delta=" << format_double(delta) << " M=" << level << " count=" << count << '\n';
  for (std::size_t i = 0; i < count; ++i) {
    const auto p = point(i);
    for (std::size_t k = 0; k < coords.size(); ++k) {
      if (k) os << ' ';
      os << format_index(coords[k]) << ':' << format_double(p[k]);
    }
    os << '\n';
  }
}

} // namespace detail

/// Line format: `# delta=<v> M=<v> count=<v>` then one `index:value ...` line per point.
inline void write_net(std::ostream& os, const Net& net)
{
  detail::write_point_lines(os, net.delta, net.truncation_level, net.coords, net.size(),
                            [&](std::size_t i) { return net.point(i); });
}

inline void write_packing(std::ostream& os, const PackingSet& p)
{
  detail::write_point_lines(os, p.delta, p.shell_hi, p.coords, p.size(), [&](std::size_t i) { return p.point(i); });
}

/// A single coefficient vector in the point-line format (count = 1).
inline void write_estimate(std::ostream& os, const CoefficientVector& v, double delta, int level)
{
  std::vector<MultiIndex> coords;
  std::vector<double> vals;
  for (const auto& [idx, x] : v.entries()) {
    coords.push_back(idx);
    vals.push_back(x);
  }
  detail::write_point_lines(os, delta, level, coords, 1, [&](std::size_t) { return std::span<const double>(vals); });
}

/// Parses the point-line format; every line must carry the same indices.
inline Net read_net(std::istream& is, BasisFamily family = BasisFamily::trig)
{
  Net net;
  net.family = family;
  net.construction = "loaded";
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw InvalidArgument("read_net: missing header line");
  std::size_t count = 0;
  bool have_delta = false, have_m = false, have_count = false;
  {
    std::istringstream hs(line.substr(2));
    std::string kv;
    while (hs >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InvalidArgument("read_net: malformed header field '" + kv + "'");
      const auto key = kv.substr(0, eq), val = kv.substr(eq + 1);
      if (key == "delta") {
        net.delta = parse_double(val);
        have_delta = true;
      } else if (key == "M") {
        net.truncation_level = std::stoi(val);
        have_m = true;
      } else if (key == "count") {
        count = std::stoull(val);
        have_count = true;
      }
    }
  }
  if (!have_delta || !have_m || !have_count) throw InvalidArgument("read_net: header needs delta, M and count");
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::size_t k = 0;
    const bool first = net.data.empty() && net.coords.empty();
    while (ls >> tok) {
      const auto colon = tok.rfind(':');
      if (colon == std::string::npos)
        throw InvalidArgument("read_net: line " + std::to_string(lineno) + ": expected index:value");
      const auto idx = parse_index(tok.substr(0, colon));
      if (first) {
        net.coords.push_back(idx);
      } else if (k >= net.coords.size() || !(net.coords[k] == idx)) {
        throw InvalidArgument("read_net: line " + std::to_string(lineno) + ": index list differs from the first point");
      }
      net.data.push_back(parse_double(tok.substr(colon + 1)));
      ++k;
    }
    if (k != net.coords.size())
      throw InvalidArgument("read_net: line " + std::to_string(lineno) + ": wrong number of entries");
  }
  if (net.size() != count)
    throw InvalidArgument("read_net: header count " + std::to_string(count) + " but " + std::to_string(net.size())
                          + " points");
  return net;
}

/// `index,z` rows.
inline void write_white_noise_csv(std::ostream& os, const WhiteNoiseObservation& obs)
{
  os << "index,z\n";
  for (std::size_t i = 0; i < obs.coords.size(); ++i)
    os << format_index(obs.coords[i]) << ',' << format_double(obs.z[i]) << '\n';
}

/// One point per row: `u,phi` for Radon image points, `y1,...,yd` otherwise.
inline void write_sample_csv(std::ostream& os, const SampleObservation& obs, bool radon)
{
  if (radon) {
    os << "u,phi\n";
  } else {
    for (int k = 0; k < obs.dim; ++k)
      os << (k ? "," : "") << 'y' << (k + 1);
    os << '\n';
  }
  for (std::size_t i = 0; i < obs.n(); ++i) {
    const auto p = obs.point(i);
    for (int k = 0; k < obs.dim; ++k)
      os << (k ? "," : "") << format_double(p[k]);
    os << '\n';
  }
}

/// `n,mise,stderr` rows.
inline void write_rate_csv(std::ostream& os,
                           std::span<const double> ns,
                           std::span<const double> mises,
                           std::span<const double> stderrs)
{
  os << "n,mise,stderr\n";
  for (std::size_t i = 0; i < ns.size(); ++i)
    os << format_double(ns[i]) << ',' << format_double(mises[i]) << ',' << format_double(stderrs[i]) << '\n';
}

} // namespace invprob
