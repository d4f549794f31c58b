// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/errors.hpp"
#include "invprob/multi_index.hpp"

#include <cmath>
#include <map>
#include <span>
#include <vector>

namespace invprob {

/// Finitely supported coefficient sequence in one orthonormal basis family.
class CoefficientVector
{
public:
  using Map = std::map<MultiIndex, double>;

  CoefficientVector() = default;
  explicit CoefficientVector(BasisFamily family)
    : family_(family)
  {
  }

  /// Dense values aligned with `coords`; zeros are kept so the support is explicit.
  static CoefficientVector from_dense(BasisFamily family,
                                      std::span<const MultiIndex> coords,
                                      std::span<const double> values)
  {
    detail::require(coords.size() == values.size(), "CoefficientVector: size mismatch");
    CoefficientVector v(family);
    for (std::size_t i = 0; i < coords.size(); ++i)
      v.entries_[coords[i]] = values[i];
    return v;
  }

  BasisFamily family() const { return family_; }
  const Map& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  void set(const MultiIndex& idx, double value) { entries_[idx] = value; }

  double get(const MultiIndex& idx) const
  {
    auto it = entries_.find(idx);
    return it == entries_.end() ? 0.0 : it->second;
  }

  std::vector<double> dense(std::span<const MultiIndex> coords) const
  {
    std::vector<double> out(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i)
      out[i] = get(coords[i]);
    return out;
  }

  double norm_sq() const
  {
    double s = 0.0;
    for (const auto& [idx, v] : entries_)
      s += v * v;
    return s;
  }

  double norm() const { return std::sqrt(norm_sq()); }

  bool all_finite() const
  {
    for (const auto& [idx, v] : entries_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  int max_order() const
  {
    int m = -1;
    for (const auto& [idx, v] : entries_)
      m = std::max(m, idx.order());
    return m;
  }

  friend double dot(const CoefficientVector& a, const CoefficientVector& b)
  {
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    double s = 0.0;
    for (const auto& [idx, v] : small.entries_)
      s += v * large.get(idx);
    return s;
  }

  friend CoefficientVector operator-(const CoefficientVector& a, const CoefficientVector& b)
  {
    CoefficientVector out = a;
    for (const auto& [idx, v] : b.entries_)
      out.entries_[idx] -= v;
    return out;
  }

  friend CoefficientVector operator+(const CoefficientVector& a, const CoefficientVector& b)
  {
    CoefficientVector out = a;
    for (const auto& [idx, v] : b.entries_)
      out.entries_[idx] += v;
    return out;
  }

  friend CoefficientVector operator*(double s, const CoefficientVector& a)
  {
    CoefficientVector out = a;
    for (auto& [idx, v] : out.entries_)
      v *= s;
    return out;
  }

  friend bool operator==(const CoefficientVector& a, const CoefficientVector& b) = default;

private:
  BasisFamily family_ = BasisFamily::trig;
  Map entries_;
};

/// Squared l2 distance, treating missing entries as zero.
inline double distance_sq(const CoefficientVector& a, const CoefficientVector& b)
{
  return (a - b).norm_sq();
}

/// gamma(theta) = sum theta^2 - 2 sum theta z, accumulated in coordinate order.
///
/// Every estimator and every exhaustive oracle evaluates the quadratic risk
/// through this one function so argmin comparisons are bit-consistent.
inline double quadratic_risk(std::span<const double> theta, std::span<const double> z)
{
  double sq = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    sq += theta[i] * theta[i];
    lin += theta[i] * z[i];
  }
  return sq - 2.0 * lin;
}

} // namespace invprob
