// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/coefficients.hpp"
#include "invprob/ellipsoid.hpp"
#include "invprob/errors.hpp"
#include "invprob/multi_index.hpp"

#include <algorithm>
#include <bit>
#include <numbers>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <vector>

namespace invprob {

/// Binary code with a guaranteed minimum Hamming distance.
struct BinaryCode
{
  std::size_t length = 0;
  std::size_t min_distance = 0;
  std::vector<std::vector<std::uint64_t>> words;
};

namespace detail {

inline std::size_t hamming(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b)
{
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d += static_cast<std::size_t>(std::popcount(a[i] ^ b[i]));
  return d;
}

} // namespace detail

/// Greedy Varshamov-Gilbert code: the full lexicode for length <= 20, else
/// seeded random greedy selection capped at `max_words`.
inline BinaryCode varshamov_gilbert_code(std::size_t length,
                                         std::size_t min_distance,
                                         std::size_t max_words = 4096,
                                         std::uint64_t seed = 1)
{
  detail::require(length >= 1, "varshamov_gilbert_code: empty shell");
  BinaryCode code;
  code.length = length;
  code.min_distance = min_distance;
  const std::size_t blocks = (length + 63) / 64;
  if (length <= 20) {
    std::vector<std::uint32_t> chosen;
    for (std::uint32_t w = 0; w < (1u << length); ++w) {
      bool ok = true;
      for (auto c : chosen)
        if (static_cast<std::size_t>(std::popcount(w ^ c)) < min_distance) {
          ok = false;
          break;
        }
      if (ok) chosen.push_back(w);
    }
    for (auto c : chosen)
      code.words.push_back({c});
    return code;
  }
  std::mt19937_64 rng(seed);
  code.words.push_back(std::vector<std::uint64_t>(blocks, 0));
  const std::uint64_t tail_mask = length % 64 == 0 ? ~0ULL : (1ULL << (length % 64)) - 1;
  std::size_t failures = 0;
  while (code.words.size() < max_words && failures < 4096) {
    std::vector<std::uint64_t> w(blocks);
    for (auto& b : w)
      b = rng();
    w.back() &= tail_mask;
    bool ok = true;
    for (const auto& c : code.words)
      if (detail::hamming(w, c) < min_distance) {
        ok = false;
        break;
      }
    if (ok) {
      code.words.push_back(std::move(w));
      failures = 0;
    } else {
      ++failures;
    }
  }
  return code;
}

/// Packing theta* + eps * omega over binary words omega on the shell M* <= |j| <= M.
struct PackingSet
{
  BasisFamily family = BasisFamily::trig;
  std::vector<MultiIndex> coords; ///< base support united with the shell
  double delta = 0.0;
  int shell_lo = 0;
  int shell_hi = 0;
  std::size_t shell_size = 0;
  std::size_t min_hamming = 0;
  double epsilon = 0.0;
  double c0 = 0.0; ///< pairwise distance >= c0 * delta
  double c = 0.0;  ///< pairwise distance <= c * delta
  CoefficientVector base;
  std::vector<double> data; ///< row-major, size() x coords.size()

  std::size_t size() const { return coords.empty() ? 0 : data.size() / coords.size(); }
  std::span<const double> point(std::size_t i) const { return {data.data() + i * coords.size(), coords.size()}; }
  CoefficientVector point_vector(std::size_t i) const { return CoefficientVector::from_dense(family, coords, point(i)); }
};

inline PackingSet build_packing_set(const Ellipsoid& e, double delta, const CoefficientVector& base)
{
  const int M = truncation_level(e, delta);
  const int Mstar = M / 2;
  if (Mstar >= M) {
    double min_delta = std::numbers::sqrt2 * e.radius() / (e.c1() * std::pow(2.0, e.s()));
    throw InvalidArgument("build_packing_set: shell is empty at delta = " + std::to_string(delta)
                          + "; use delta <= " + std::to_string(min_delta));
  }
  const double base_norm = std::sqrt(e.weighted_norm_sq(base));
  detail::require(base_norm < e.radius(), "build_packing_set: base point must lie strictly inside the ellipsoid");

  PackingSet p;
  p.family = e.family();
  p.delta = delta;
  p.shell_lo = Mstar;
  p.shell_hi = M;
  p.base = base;
  const auto shell = e.coordinates(M, Mstar);
  std::set<MultiIndex> all(shell.begin(), shell.end());
  for (const auto& [idx, v] : base.entries())
    all.insert(idx);
  p.coords.assign(all.begin(), all.end());
  p.shell_size = shell.size();

  double wsum = 0.0;
  for (const auto& idx : shell)
    wsum += e.weight(idx) * e.weight(idx);
  p.epsilon = (e.radius() - base_norm) / std::sqrt(wsum);
  p.min_hamming = (shell.size() + 3) / 4;
  p.c0 = p.epsilon * std::sqrt(static_cast<double>(p.min_hamming)) / delta;
  p.c = p.epsilon * std::sqrt(static_cast<double>(shell.size())) / delta;

  const auto code = varshamov_gilbert_code(shell.size(), p.min_hamming);
  std::vector<std::size_t> shell_pos(shell.size());
  for (std::size_t k = 0; k < shell.size(); ++k)
    shell_pos[k] = static_cast<std::size_t>(std::lower_bound(p.coords.begin(), p.coords.end(), shell[k]) - p.coords.begin());
  const auto base_dense = base.dense(p.coords);
  for (const auto& w : code.words) {
    std::vector<double> pt = base_dense;
    for (std::size_t k = 0; k < shell.size(); ++k)
      if ((w[k / 64] >> (k % 64)) & 1ULL) pt[shell_pos[k]] += p.epsilon;
    p.data.insert(p.data.end(), pt.begin(), pt.end());
  }
  return p;
}

} // namespace invprob
