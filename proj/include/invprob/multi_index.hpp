// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/errors.hpp"

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace invprob {

constexpr int kMaxDim = 4;

/// Which orthonormal system a coefficient index refers to.
enum class BasisFamily
{
  trig,               ///< tensor cos/sin system on [0,1]^d
  cosine,             ///< sqrt(2) cos(2 pi j t) on [0,1], j >= 0
  disk,               ///< realified Zernike system on the unit disk, (0,0) excluded
  disk_with_constant, ///< same, with the constant (0,0) admitted (density models)
};

inline std::string_view to_string(BasisFamily f)
{
  switch (f) {
    case BasisFamily::trig: return "trig";
    case BasisFamily::cosine: return "cosine";
    case BasisFamily::disk: return "disk";
    case BasisFamily::disk_with_constant: return "disk_with_constant";
  }
  return "?";
}

inline BasisFamily basis_family_from_string(std::string_view s)
{
  if (s == "trig") return BasisFamily::trig;
  if (s == "cosine") return BasisFamily::cosine;
  if (s == "disk") return BasisFamily::disk;
  if (s == "disk_with_constant") return BasisFamily::disk_with_constant;
  throw InvalidArgument("unknown basis family '" + std::string(s) + "'");
}

/// Multi-index (j_1..j_d) with a per-axis cos/sin parity bit.
///
/// For the disk families `dim == 2` and the pair is (j, k) of the Zernike
/// system; parity is unused there.
struct MultiIndex
{
  std::uint8_t dim = 1;
  std::array<std::uint16_t, kMaxDim> j{};
  std::uint8_t parity = 0; ///< bit i set means sine on axis i

  MultiIndex() = default;

  static MultiIndex scalar(int j0, bool sine = false)
  {
    MultiIndex m;
    m.dim = 1;
    m.j[0] = static_cast<std::uint16_t>(j0);
    m.parity = sine ? 1 : 0;
    return m;
  }

  static MultiIndex of(std::initializer_list<int> js, std::uint8_t parity_bits = 0)
  {
    detail::require(js.size() >= 1 && js.size() <= kMaxDim, "MultiIndex: bad dimension");
    MultiIndex m;
    m.dim = static_cast<std::uint8_t>(js.size());
    int i = 0;
    for (int v : js) {
      detail::require(v >= 0, "MultiIndex: negative component");
      m.j[i++] = static_cast<std::uint16_t>(v);
    }
    m.parity = parity_bits;
    return m;
  }

  int order() const
  {
    int s = 0;
    for (int i = 0; i < dim; ++i)
      s += j[i];
    return s;
  }

  bool sine(int axis) const { return (parity >> axis) & 1u; }

  /// k_i = 0 whenever j_i = 0.
  bool parity_valid() const
  {
    for (int i = 0; i < dim; ++i)
      if (sine(i) && j[i] == 0)
        return false;
    return (parity >> dim) == 0;
  }

  bool is_zero() const { return order() == 0; }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b)
  {
    return a.dim == b.dim && a.j == b.j && a.parity == b.parity;
  }

  /// Graded order: |j| first, then components, then parity.
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b)
  {
    if (auto c = a.dim <=> b.dim; c != 0) return c;
    if (auto c = a.order() <=> b.order(); c != 0) return c;
    for (int i = 0; i < a.dim; ++i)
      if (auto c = a.j[i] <=> b.j[i]; c != 0) return c;
    return a.parity <=> b.parity;
  }
};

/// Text token: axes joined by '.', an 's' suffix marks a sine axis ("3", "2s", "1.0", "1s.2").
inline std::string format_index(const MultiIndex& m)
{
  std::string out;
  for (int i = 0; i < m.dim; ++i) {
    if (i) out += '.';
    out += std::to_string(m.j[i]);
    if (m.sine(i)) out += 's';
  }
  return out;
}

inline MultiIndex parse_index(std::string_view tok)
{
  MultiIndex m;
  m.dim = 0;
  std::size_t pos = 0;
  while (pos <= tok.size()) {
    std::size_t end = tok.find('.', pos);
    if (end == std::string_view::npos) end = tok.size();
    std::string_view part = tok.substr(pos, end - pos);
    if (part.empty() || m.dim >= kMaxDim)
      throw InvalidArgument("malformed index token '" + std::string(tok) + "'");
    bool sine = false;
    if (part.back() == 's') {
      sine = true;
      part.remove_suffix(1);
    }
    int v = 0;
    if (part.empty()) throw InvalidArgument("malformed index token '" + std::string(tok) + "'");
    for (char c : part) {
      if (c < '0' || c > '9')
        throw InvalidArgument("malformed index token '" + std::string(tok) + "'");
      v = v * 10 + (c - '0');
    }
    m.j[m.dim] = static_cast<std::uint16_t>(v);
    if (sine) m.parity |= static_cast<std::uint8_t>(1u << m.dim);
    ++m.dim;
    pos = end + 1;
  }
  if (!m.parity_valid())
    throw InvalidArgument("index '" + std::string(tok) + "' has a sine axis with j = 0");
  return m;
}

/// All basis indices of `family` with |j| <= max_order, in graded order.
inline std::vector<MultiIndex> enumerate_indices(BasisFamily family, int dim, int max_order)
{
  std::vector<MultiIndex> out;
  if (max_order < 0) return out;
  switch (family) {
    case BasisFamily::cosine:
      for (int j = 0; j <= max_order; ++j)
        out.push_back(MultiIndex::scalar(j));
      return out;
    case BasisFamily::disk:
    case BasisFamily::disk_with_constant:
      for (int m = 0; m <= max_order; ++m)
        for (int j = 0; j <= m; ++j) {
          if (m == 0 && family == BasisFamily::disk) continue;
          out.push_back(MultiIndex::of({j, m - j}));
        }
      return out;
    case BasisFamily::trig: break;
  }
  detail::require(dim >= 1 && dim <= kMaxDim, "enumerate_indices: dimension out of range");
  MultiIndex cur;
  cur.dim = static_cast<std::uint8_t>(dim);
  // Odometer over j with |j| <= max_order.
  std::vector<MultiIndex> raw;
  for (;;) {
    if (cur.order() <= max_order) {
      std::uint8_t free_axes = 0;
      for (int i = 0; i < dim; ++i)
        if (cur.j[i] > 0) free_axes |= static_cast<std::uint8_t>(1u << i);
      // every subset of the nonzero axes
      for (std::uint8_t sub = free_axes;; sub = static_cast<std::uint8_t>((sub - 1) & free_axes)) {
        MultiIndex m = cur;
        m.parity = sub;
        raw.push_back(m);
        if (sub == 0) break;
      }
    }
    int axis = 0;
    while (axis < dim) {
      if (cur.j[axis] < max_order) {
        ++cur.j[axis];
        break;
      }
      cur.j[axis] = 0;
      ++axis;
    }
    if (axis == dim) break;
  }
  std::sort(raw.begin(), raw.end());
  return raw;
}

} // namespace invprob
