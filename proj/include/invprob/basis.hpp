// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/errors.hpp"
#include "invprob/multi_index.hpp"

#include <cmath>
#include <numbers>
#include <span>

namespace invprob {

/// Point of the unit disk in polar coordinates.
struct DiskPoint
{
  double r = 0.0;
  double theta = 0.0;
};

/// Line parameters of the 2D Radon image space: distance u in [0,1], normal angle phi.
struct RadonPoint
{
  double u = 0.0;
  double phi = 0.0;
};

/// Tensor trigonometric basis function phi_jk at x in [0,1]^d.
///
/// Axes with j_i = 0 contribute the constant 1, so the family is orthonormal
/// in L2([0,1]^d).
inline double eval_trig_basis(const MultiIndex& idx, std::span<const double> x)
{
  detail::require(idx.parity_valid(), "eval_trig_basis: sine parity on an axis with j = 0");
  detail::require(x.size() == idx.dim, "eval_trig_basis: point dimension mismatch");
  double v = 1.0;
  for (int i = 0; i < idx.dim; ++i) {
    if (idx.j[i] == 0)
      continue;
    const double arg = 2.0 * std::numbers::pi * idx.j[i] * x[i];
    v *= std::numbers::sqrt2 * (idx.sine(i) ? std::sin(arg) : std::cos(arg));
  }
  return v;
}

/// Radial Zernike polynomial Z_a^b(r), a >= b >= 0, a - b even.
///
/// Evaluated through Z_a^b(r) = (-1)^k r^b P_k^{(b,0)}(1 - 2r^2), k = (a-b)/2,
/// with the ascending three-term Jacobi recurrence.
inline double eval_zernike_radial(int a, int b, double r)
{
  detail::require(a >= b && b >= 0, "eval_zernike_radial: need a >= b >= 0");
  detail::require((a - b) % 2 == 0, "eval_zernike_radial: a - b must be even");
  const int k = (a - b) / 2;
  const double x = 1.0 - 2.0 * r * r;
  const double alpha = b;
  double p_prev = 1.0;
  double p = 1.0;
  if (k >= 1) {
    p = (alpha + 1.0) + (alpha + 2.0) * (x - 1.0) / 2.0;
    for (int n = 2; n <= k; ++n) {
      const double c = 2.0 * n + alpha;
      const double a1 = 2.0 * n * (n + alpha) * (c - 2.0);
      const double a2 = (c - 1.0) * (c * (c - 2.0) * x + alpha * alpha);
      const double a3 = 2.0 * (n + alpha - 1.0) * (n - 1.0) * c;
      const double next = (a2 * p - a3 * p_prev) / a1;
      p_prev = p;
      p = next;
    }
  }
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * std::pow(r, b) * p;
}

/// Chebyshev polynomial of the second kind U_m(u) by U_{m+1} = 2u U_m - U_{m-1}.
inline double eval_chebyshev_U(int m, double u)
{
  detail::require(m >= 0, "eval_chebyshev_U: negative degree");
  double prev = 1.0;
  if (m == 0) return prev;
  double cur = 2.0 * u;
  for (int i = 1; i < m; ++i) {
    const double next = 2.0 * u * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace detail {

// Realified angular factor shared by both sides of the Radon SVD:
// sqrt2*cos for j > k, 1 for j == k, sqrt2*Im(e^{i(j-k)t}) for j < k.
inline double radon_angular(int j, int k, double t)
{
  const int l = j - k;
  if (l > 0) return std::numbers::sqrt2 * std::cos(l * t);
  if (l == 0) return 1.0;
  return std::numbers::sqrt2 * std::sin(l * t);
}

inline double radon_image_unchecked(const MultiIndex& idx, RadonPoint p)
{
  const int j = idx.j[0], k = idx.j[1];
  return std::numbers::inv_sqrtpi * eval_chebyshev_U(j + k, p.u) * radon_angular(j, k, p.phi);
}

inline double disk_unchecked(const MultiIndex& idx, DiskPoint p)
{
  const int j = idx.j[0], k = idx.j[1];
  const int m = j + k;
  return std::numbers::inv_sqrtpi * std::sqrt(m + 1.0) * eval_zernike_radial(m, std::abs(j - k), p.r)
         * radon_angular(j, k, p.theta);
}

inline void require_disk_index(const MultiIndex& idx, bool allow_constant, const char* who)
{
  require(idx.dim == 2, std::string(who) + ": disk indices are pairs (j, k)");
  require(allow_constant || idx.order() > 0, std::string(who) + ": index (0,0) is not part of the basis");
}

} // namespace detail

/// Realified Radon image function psi_jk(u, phi), orthonormal under
/// d nu = 2/pi sqrt(1-u^2) du dphi on [0,1] x [0,2pi).
inline double eval_radon_image_basis(const MultiIndex& idx, RadonPoint p)
{
  detail::require_disk_index(idx, false, "eval_radon_image_basis");
  return detail::radon_image_unchecked(idx, p);
}

/// Realified Zernike disk function phi_jk(r, theta), orthonormal in L2(D).
inline double eval_disk_basis(const MultiIndex& idx, DiskPoint p, bool allow_constant = false)
{
  detail::require_disk_index(idx, allow_constant, "eval_disk_basis");
  return detail::disk_unchecked(idx, p);
}

/// Density of the Radon image measure nu with respect to du dphi.
inline double radon_measure_density(double u)
{
  return 2.0 * std::numbers::inv_pi * std::sqrt(std::max(0.0, 1.0 - u * u));
}

} // namespace invprob
