// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "invprob/coefficients.hpp"
#include "invprob/ellipsoid.hpp"
#include "invprob/errors.hpp"
#include "invprob/estimators.hpp"
#include "invprob/models.hpp"
#include "invprob/net.hpp"
#include "invprob/operators.hpp"
#include "invprob/parallel.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace invprob {

/// White noise: sum theta^2 - 2 sum theta z over the support of g.
inline double empirical_risk(const CoefficientVector& g, const WhiteNoiseObservation& obs)
{
  detail::require(g.all_finite(), "empirical_risk: non-finite coefficients");
  std::vector<MultiIndex> coords;
  std::vector<double> theta;
  for (const auto& [idx, v] : g.entries()) {
    coords.push_back(idx);
    theta.push_back(v);
  }
  return quadratic_risk(theta, aligned_stats(obs, coords));
}

/// Density: -(2/n) sum_i (Qg)(Y_i) + ||g||^2, evaluated pointwise.
inline double empirical_risk(const CoefficientVector& g, const SampleObservation& obs, const SvdOperator& op)
{
  detail::require(g.all_finite(), "empirical_risk: non-finite coefficients");
  detail::require(obs.n() >= 1, "empirical_risk: empty sample");
  double s = 0.0;
  for (std::size_t i = 0; i < obs.n(); ++i)
    s += eval_Q_pointwise(op, g, obs.point(i));
  return -2.0 * s / static_cast<double>(obs.n()) + g.norm_sq();
}

/// Centered empirical process nu_n(Qg) = n^-1 sum_i (Qg)(Y_i) - <g, f>.
inline double nu_n(const CoefficientVector& g, const SampleObservation& obs, const SvdOperator& op, const CoefficientVector& f)
{
  double s = 0.0;
  for (std::size_t i = 0; i < obs.n(); ++i)
    s += eval_Q_pointwise(op, g, obs.point(i));
  return s / static_cast<double>(obs.n()) - dot(g, f);
}

/// White-noise counterpart: sum_j g_j (z_j - f_j).
inline double nu_n(const CoefficientVector& g, const WhiteNoiseObservation& obs, const CoefficientVector& f)
{
  double s = 0.0;
  for (const auto& [idx, v] : g.entries()) {
    const MultiIndex one[] = {idx};
    s += v * (aligned_stats(obs, one)[0] - f.get(idx));
  }
  return s;
}

struct MiseResult
{
  double mean = 0.0;
  double stderr_ = 0.0;
  std::vector<double> errors; ///< per replication, index order
};

/// Squared errors ||estimate(rep) - truth||^2 over `reps` replications. The
/// estimator receives the replication seed; coordinates of the truth outside
/// the estimate contribute their full squared mass.
inline MiseResult mise_monte_carlo(const CoefficientVector& truth,
                                   const std::function<CoefficientVector(std::size_t rep, std::uint64_t seed)>& estimate,
                                   std::size_t reps,
                                   std::uint64_t master_seed,
                                   unsigned threads = 1)
{
  detail::require(reps >= 2, "mise_monte_carlo: need at least two replications");
  MiseResult out;
  out.errors.assign(reps, 0.0);
  parallel_for(reps, threads, [&](std::size_t r) {
    const auto prefix = "replication " + std::to_string(r) + ": ";
    try {
      out.errors[r] = distance_sq(estimate(r, derive_seed(master_seed, r)), truth);
    } catch (const ResourceError& e) {
      throw ResourceError(prefix + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError(prefix + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(prefix + e.what());
    }
  });
  double s = 0.0;
  for (double v : out.errors)
    s += v;
  out.mean = s / static_cast<double>(reps);
  double ss = 0.0;
  for (double v : out.errors)
    ss += (v - out.mean) * (v - out.mean);
  out.stderr_ = std::sqrt(ss / static_cast<double>(reps - 1) / static_cast<double>(reps));
  return out;
}

enum class ObservationMode
{
  white_noise,
  density
};

struct RiskBoundConstants
{
  double xi = 0.26;
  double c_tau = 32.0;
  double c1 = 0.0;
  double c2 = 0.0;
  ObservationMode mode = ObservationMode::white_noise;
  double b_inf = 0.0;
  double b_inf_prime = 0.0;

  /// Smallest admissible xi for the mode.
  double xi_min() const
  {
    if (mode == ObservationMode::white_noise) return std::sqrt(2.0 / c_tau);
    const double bp = b_inf_prime;
    return (4.0 * bp / 3.0 + std::sqrt(2.0 * (8.0 * bp * bp / 9.0 + c_tau * b_inf))) / c_tau;
  }

  void validate() const
  {
    detail::require(c_tau > 0.0, "risk bound constants: C_tau must be positive");
    if (mode == ObservationMode::density)
      detail::require(b_inf > 0.0 && b_inf_prime > 0.0, "risk bound constants: density mode needs B_inf, B_inf' > 0");
    if (!(xi >= xi_min() && xi < 0.5))
      throw InvalidArgument("risk bound constants: xi = " + std::to_string(xi) + " outside the admissible interval ["
                            + std::to_string(xi_min()) + ", 0.5)");
    detail::require(std::abs(c1 - (1.0 + 2.0 * xi) / (1.0 - 2.0 * xi)) <= 1e-12 * c1, "risk bound constants: stale C1");
    detail::require(std::abs(c2 - xi * c_tau / (1.0 - 2.0 * xi)) <= 1e-12 * c2, "risk bound constants: stale C2");
  }

  static RiskBoundConstants make(double xi,
                                  double c_tau,
                                  ObservationMode mode = ObservationMode::white_noise,
                                  double b_inf = 0.0,
                                  double b_inf_prime = 0.0)
  {
    RiskBoundConstants k;
    k.xi = xi;
    k.c_tau = c_tau;
    k.mode = mode;
    k.b_inf = b_inf;
    k.b_inf_prime = b_inf_prime;
    k.c1 = (1.0 + 2.0 * xi) / (1.0 - 2.0 * xi);
    k.c2 = xi * c_tau / (1.0 - 2.0 * xi);
    k.validate();
    return k;
  }
};

/// C1 delta^2 + C2 rho^2 (log #net + 1) / n.
inline double oracle_risk_bound(const RiskBoundConstants& k, double delta, double log_card, double rho, double n)
{
  k.validate();
  detail::require(delta >= 0.0 && log_card >= 0.0 && rho >= 0.0 && n > 0.0, "oracle_risk_bound: invalid arguments");
  return k.c1 * delta * delta + k.c2 * rho * rho * (log_card + 1.0) / n;
}

/// 3 delta^2 + 32 c^-1 n^-1 [sum rho_j^2 lambda_j + (sum rho_j)^2], delta = sum delta_j.
inline double additive_risk_bound(double c,
                             std::span<const double> deltas,
                             std::span<const double> rhos,
                             std::span<const double> lambdas,
                             double n)
{
  if (!(c > 0.0)) throw InvalidArgument("additive_risk_bound: c must be positive");
  detail::require(rhos.size() == lambdas.size(), "additive_risk_bound: one rho and one lambda per component");
  detail::require(n > 0.0, "additive_risk_bound: n must be positive");
  const double delta = std::accumulate(deltas.begin(), deltas.end(), 0.0);
  double quad = 0.0, lin = 0.0;
  for (std::size_t j = 0; j < rhos.size(); ++j) {
    quad += rhos[j] * rhos[j] * lambdas[j];
    lin += rhos[j];
  }
  return 3.0 * delta * delta + 32.0 / (c * n) * (quad + lin * lin);
}

struct EntropyIntegral
{
  double value = 0.0;
  bool divergent = false;
};

/// Trapezoid rule for int_0^delta g(u) du on a geometric grid over
/// [delta 10^-decades, delta]; [0, u_min] uses the power law through the
/// secant over the lowest quarter of the grid (net integrands are step
/// functions), and a non-integrable power flags divergence.
inline EntropyIntegral entropy_integral(const std::function<double(double)>& integrand,
                                        double delta,
                                        std::size_t grid_size,
                                        double decades = 2.0)
{
  detail::require(grid_size >= 16, "entropy_integral: grid_size must be at least 16");
  detail::require(delta >= 0.0, "entropy_integral: delta must be non-negative");
  EntropyIntegral out;
  if (delta == 0.0) return out;
  const double umin = delta * std::pow(10.0, -decades);
  std::vector<double> u(grid_size), g(grid_size);
  for (std::size_t k = 0; k < grid_size; ++k) {
    u[k] = umin * std::pow(delta / umin, static_cast<double>(k) / (grid_size - 1));
    g[k] = integrand(u[k]);
  }
  double s = 0.0;
  for (std::size_t k = 1; k < grid_size; ++k)
    s += 0.5 * (g[k] + g[k - 1]) * (u[k] - u[k - 1]);
  const std::size_t k1 = grid_size / 4;
  if (g[0] > 0.0 && g[k1] > 0.0) {
    const double p = std::log(g[k1] / g[0]) / std::log(u[k1] / u[0]);
    if (p <= -1.0) {
      out.divergent = true;
      out.value = std::numeric_limits<double>::infinity();
      return out;
    }
    s += g[0] * umin / (1.0 + p);
  }
  out.value = s;
  return out;
}

/// Analytic mode: rho <= C_rho u^-a, log# <= C_N u^-b, so the integral is
/// C_rho sqrt(C_N) delta^(1-a-b/2) / (1-a-b/2), divergent once a + b/2 >= 1.
inline EntropyIntegral entropy_integral_analytic(double c_rho, double a, double c_n, double b, double delta)
{
  EntropyIntegral out;
  const double e = 1.0 - a - 0.5 * b;
  if (e <= 0.0) {
    out.divergent = true;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.value = c_rho * std::sqrt(c_n) * std::pow(delta, e) / e;
  return out;
}

/// Entropy integral of the lattice nets for (op, e); fast mode uses the
/// polynomial laws a = q/s, b = d/s with unit constants.
inline EntropyIntegral entropy_integral(const SvdOperator& op,
                                        const Ellipsoid& e,
                                        double delta,
                                        std::size_t grid_size,
                                        bool fast = false,
                                        double decades = 1.0)
{
  detail::require(delta > 0.0 || delta == 0.0, "entropy_integral: invalid delta");
  if (delta > e.l2_bound())
    throw InvalidArgument("entropy_integral: delta exceeds the L2 bound B2 = " + std::to_string(e.l2_bound()));
  const int d = e.family() == BasisFamily::cosine ? 1 : e.dim();
  const double a = op.q() / e.s(), b = d / e.s();
  if (a + 0.5 * b >= 1.0) return {std::numeric_limits<double>::infinity(), true};
  if (fast) return entropy_integral_analytic(1.0, a, 1.0, b, delta);
  return entropy_integral(
    [&](double u) {
      // above the truncation threshold the net collapses to one point
      LatticeNet net;
      try {
        net = LatticeNet::build(e, u);
      } catch (const InvalidArgument&) {
        return 0.0;
      }
      const double lc = net.log_cardinality().estimate();
      return rho_Q(op, net).value * std::sqrt(std::max(0.0, lc));
    },
    delta, grid_size, decades);
}

struct RateExperiment
{
  std::vector<double> ns;
  std::vector<double> mises;
  std::vector<double> stderrs;
  std::size_t reps = 0;
  double target_exponent = 0.0;
};

struct RateFit
{
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  double target = 0.0;
};

/// Weighted least squares of log MISE on log n with weights (mise/stderr)^2.
inline RateFit rate_regression(const RateExperiment& x)
{
  const std::size_t k = x.ns.size();
  detail::require(k >= 4, "rate_regression: need at least four sample sizes");
  detail::require(x.mises.size() == k && x.stderrs.size() == k, "rate_regression: column size mismatch");
  detail::require(x.reps >= 30, "rate_regression: need at least 30 replications");
  for (std::size_t i = 1; i < k; ++i)
    detail::require(x.ns[i] > x.ns[i - 1], "rate_regression: sample sizes must increase");
  detail::require(x.ns.back() / x.ns.front() >= 100.0 - 1e-9, "rate_regression: sample sizes must span two decades");
  std::vector<double> w(k);
  bool any_zero = false;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(x.mises[i] > 0.0)) throw InvalidArgument("rate_regression: non-positive MISE at n = " + std::to_string(x.ns[i]));
    detail::require(std::isfinite(x.stderrs[i]) && x.stderrs[i] >= 0.0, "rate_regression: invalid standard error");
    any_zero = any_zero || x.stderrs[i] == 0.0;
  }
  for (std::size_t i = 0; i < k; ++i)
    w[i] = any_zero ? 1.0 : (x.mises[i] / x.stderrs[i]) * (x.mises[i] / x.stderrs[i]);
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sw += w[i];
    sx += w[i] * std::log(x.ns[i]);
    sy += w[i] * std::log(x.mises[i]);
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = std::log(x.ns[i]) - mx;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (std::log(x.mises[i]) - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.target = x.target_exponent;
  double rss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = std::log(x.mises[i]) - fit.intercept - fit.slope * std::log(x.ns[i]);
    rss += w[i] * r * r;
  }
  fit.slope_stderr = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  return fit;
}

/// MISE exponent -2s/(2s+2q+d) of the polynomial ill-posed case.
inline double rate_exponent(double s, double q, double d)
{
  return -2.0 * s / (2.0 * s + 2.0 * q + d);
}

/// delta(n) = n^(-s/(2s+2q+d)), balancing the bias and variance terms of the risk bound.
inline double matched_delta(double n, double s, double q, double d)
{
  return std::pow(n, -s / (2.0 * s + 2.0 * q + d));
}

} // namespace invprob
