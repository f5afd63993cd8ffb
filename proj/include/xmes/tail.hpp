#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "xmes/error.hpp"
#include "xmes/radial.hpp"

namespace xmes {

/// Hall-Welsh second-order pair of the radius, estimated at level s.
struct SecondOrder {
  double beta = 0.0;
  double rho = -1.0;
  std::size_t s = 0;
};

struct TailFit {
  double gamma_hat = 0.0;
  std::size_t k = 0;
  std::optional<SecondOrder> second_order;
};

namespace detail {

inline void check_k(const RadialSample& r, std::size_t k) {
  if (k < 1 || k + 1 > r.size())
    throw Error(ErrorCode::InvalidK,
                "k=" + std::to_string(k) + " outside [1, n-1] for n=" + std::to_string(r.size()));
}

inline void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::InvalidTau, "tau must lie in (0,1)");
}

// A ratio that is one up to rounding is treated as exactly one, so that the
// extrapolation factor at tau = 1 - k/n is exactly 1.
inline double snap_unit(double ratio) {
  return std::abs(ratio - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon() ? 1.0 : ratio;
}

// n(1 - tau)/k
inline double extrapolation_ratio(std::size_t n, std::size_t k, double tau) {
  return snap_unit(static_cast<double>(n) * (1.0 - tau) / static_cast<double>(k));
}

}  // namespace detail

/// Weighted log-spacings form of the Hill estimator,
///   sum_{i=1}^{k} (i/k) [ln R_(n-i+1) - ln R_(n-i)].
inline double hill_estimate(const RadialSample& r, std::size_t k) {
  detail::check_k(r, k);
  const std::size_t n = r.size();
  if (!(r.threshold(k) > 0.0))
    throw Error(ErrorCode::DegenerateTail, "threshold order statistic is not positive");
  const double kd = static_cast<double>(k);
  double gamma = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    const double spacing = std::log(r.sorted[n - i]) - std::log(r.sorted[n - i - 1]);
    gamma += (static_cast<double>(i) / kd) * spacing;
  }
  if (!(gamma > 0.0)) throw Error(ErrorCode::DegenerateTail, "top order statistics are tied");
  return gamma;
}

/// Weissman extrapolation R_(n-k,n) (n(1-tau)/k)^(-gamma).
inline double weissman_quantile(const RadialSample& r, std::size_t k, double tau, double gamma) {
  detail::check_k(r, k);
  detail::check_tau(tau);
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw Error(ErrorCode::InvalidInput, "gamma must be positive and finite");
  const double ratio = detail::extrapolation_ratio(r.size(), k, tau);
  return r.threshold(k) * std::pow(ratio, -gamma);
}

/// Number of radii strictly above R_(n-k,n). Equals k for tie-free data.
inline std::size_t exceedance_count(const RadialSample& r, std::size_t k) {
  detail::check_k(r, k);
  const double thr = r.threshold(k);
  return static_cast<std::size_t>(
      std::count_if(r.radii.begin(), r.radii.end(), [thr](double v) { return v > thr; }));
}

/// (1/k) sum_i W_i 1(R_i > R_(n-k,n)); the divisor is k even when ties leave
/// fewer than k exceedances.
inline std::vector<double> angular_mean(const RadialSample& r, std::size_t k) {
  detail::check_k(r, k);
  const double thr = r.threshold(k);
  std::vector<double> w(r.dim, 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r.radii[i] > thr)) continue;
    if (!(r.radii[i] > 0.0))
      throw Error(ErrorCode::DegenerateTail, "exceeding radius is not positive");
    ++count;
    for (std::size_t j = 0; j < r.dim; ++j) w[j] += r.angle(i, j);
  }
  if (count == 0) throw Error(ErrorCode::DegenerateThreshold, "no radius exceeds the threshold");
  for (double& v : w) v /= static_cast<double>(k);
  return w;
}

/// Default level for the second-order estimators: floor(n^0.97), capped at n-2.
inline std::size_t default_second_order_level(std::size_t n) {
  const auto s = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 0.97)));
  return std::min(s, n >= 2 ? n - 2 : std::size_t{0});
}

/// As above, further capped so that R_(n-s,n) stays positive.
inline std::size_t default_second_order_level(const RadialSample& r) {
  const auto positive = static_cast<std::size_t>(
      std::count_if(r.sorted.begin(), r.sorted.end(), [](double v) { return v > 0.0; }));
  return std::min(default_second_order_level(r.size()), positive >= 1 ? positive - 1 : std::size_t{0});
}

inline constexpr double kRhoMin = -10.0;
inline constexpr double kRhoMax = -0.01;

/// Moment-ratio estimator of rho (tuning parameter zero) and the companion
/// beta estimator, both computed from the top s log-excesses of the radius.
inline SecondOrder second_order_params(const RadialSample& r, std::size_t s) {
  const std::size_t n = r.size();
  if (s < 3 || s + 1 > n)
    throw Error(ErrorCode::InvalidK, "s=" + std::to_string(s) + " outside [3, n-1]");
  if (!(r.threshold(s) > 0.0))
    throw Error(ErrorCode::DegenerateTail, "threshold order statistic is not positive");

  const double sd = static_cast<double>(s);
  const double log_thr = std::log(r.threshold(s));
  double m1 = 0.0, m2 = 0.0, m3 = 0.0;
  std::vector<double> spacing(s);
  for (std::size_t i = 1; i <= s; ++i) {
    const double top = std::log(r.sorted[n - i]);
    const double e = top - log_thr;
    m1 += e;
    m2 += e * e;
    m3 += e * e * e;
    spacing[i - 1] = static_cast<double>(i) * (top - std::log(r.sorted[n - i - 1]));
  }
  m1 /= sd;
  m2 /= sd;
  m3 /= sd;
  if (!(m1 > 0.0) || !(m2 > 0.0) || !(m3 > 0.0))
    throw Error(ErrorCode::DegenerateTail, "log-excesses are degenerate");

  const double t_num = std::log(m1) - 0.5 * std::log(m2 / 2.0);
  const double t_den = 0.5 * std::log(m2 / 2.0) - std::log(m3 / 6.0) / 3.0;
  const double t = t_num / t_den;
  double rho = -std::abs(3.0 * (t - 1.0) / (t - 3.0));
  if (std::isnan(rho)) throw Error(ErrorCode::DegenerateTail, "rho statistic undefined");
  rho = std::clamp(rho, kRhoMin, kRhoMax);

  auto d_weight = [&](double a) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= s; ++i) acc += std::pow(static_cast<double>(i) / sd, -a);
    return acc / sd;
  };
  auto d_stat = [&](double a) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= s; ++i)
      acc += std::pow(static_cast<double>(i) / sd, -a) * spacing[i - 1];
    return acc / sd;
  };
  const double dr = d_weight(rho);
  const double d0 = d_stat(0.0);
  const double d1 = d_stat(rho);
  const double d2 = d_stat(2.0 * rho);
  const double den = dr * d1 - d2;
  const double beta = std::pow(sd / static_cast<double>(n), rho) * (dr * d0 - d1) / den;
  if (!std::isfinite(beta)) throw Error(ErrorCode::DegenerateTail, "beta statistic undefined");
  return {beta, rho, s};
}

/// gamma (1 - beta (n/k)^rho / (1 - rho))
inline double adjusted_gamma(double gamma, double beta, double rho, std::size_t n, std::size_t k) {
  if (!(rho < 0.0)) throw Error(ErrorCode::InvalidInput, "rho must be negative");
  if (k < 1 || k >= n) throw Error(ErrorCode::InvalidK, "k outside [1, n-1]");
  const double nk = static_cast<double>(n) / static_cast<double>(k);
  return gamma * (1.0 - beta * std::pow(nk, rho) / (1.0 - rho));
}

/// Log of the quantile correction factor,
///   beta (n/k)^rho ((k/(n(1-tau)))^rho - 1) / rho.
inline double quantile_correction(std::size_t n, std::size_t k, double tau, double beta, double rho) {
  if (!(rho < 0.0)) throw Error(ErrorCode::InvalidInput, "rho must be negative");
  const double nk = static_cast<double>(n) / static_cast<double>(k);
  const double inv_ratio = 1.0 / detail::extrapolation_ratio(n, k, tau);
  return beta * std::pow(nk, rho) * (std::pow(inv_ratio, rho) - 1.0) / rho;
}

/// Bias-corrected Weissman quantile. gamma_adj may be any finite value here.
inline double adjusted_quantile(const RadialSample& r, std::size_t k, double tau, double gamma_adj,
                                double beta, double rho) {
  detail::check_k(r, k);
  detail::check_tau(tau);
  if (!std::isfinite(gamma_adj)) throw Error(ErrorCode::InvalidInput, "gamma must be finite");
  const double ratio = detail::extrapolation_ratio(r.size(), k, tau);
  const double c = quantile_correction(r.size(), k, tau, beta, rho);
  return r.threshold(k) * std::pow(ratio, -gamma_adj) * std::exp(c);
}

inline TailFit fit_tail(const RadialSample& r, std::size_t k, std::optional<std::size_t> s = {}) {
  TailFit fit{hill_estimate(r, k), k, std::nullopt};
  if (s) fit.second_order = second_order_params(r, *s);
  return fit;
}

}  // namespace xmes
