#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "xmes/error.hpp"
#include "xmes/mes.hpp"
#include "xmes/special.hpp"
#include "xmes/tail.hpp"

namespace xmes {

/// Centre and spread of the log-scale interval exponent.
struct IntervalTerms {
  double bias = 0.0;
  double scale = 0.0;
};

/// theta * base^(bias +- z scale / sqrt(k)), ordered so that lower <= upper.
inline std::pair<double, double> interval_bounds(double theta, double base, double bias,
                                                 double scale, std::size_t k, double z) {
  const double half = z * scale / std::sqrt(static_cast<double>(k));
  const double a = theta * std::pow(base, bias + half);
  const double b = theta * std::pow(base, bias - half);
  return {std::min(a, b), std::max(a, b)};
}

/// Bias term gamma beta (n/k)^rho / (1 - rho) of the plain estimator.
inline double interval_bias(double gamma, const SecondOrder& so, std::size_t n, std::size_t k) {
  const double nk = static_cast<double>(n) / static_cast<double>(k);
  return gamma * so.beta * std::pow(nk, so.rho) / (1.0 - so.rho);
}

/// Exponent terms for the requested interval. For the adjusted estimator the
/// bias is zero; the refined kind additionally rescales bias and spread by
/// the log-extrapolation length.
inline IntervalTerms interval_terms(Variant variant, const TailFit& fit, CiKind kind,
                                    std::size_t n, std::size_t k, double tau) {
  const double gamma = fit.gamma_hat;
  detail::require_finite_mean(gamma);
  double bias = 0.0;
  if (variant == Variant::Plain) {
    if (!fit.second_order)
      throw Error(ErrorCode::MissingSecondOrder, "plain-estimator interval needs (beta, rho)");
    bias = interval_bias(gamma, *fit.second_order, n, k);
  } else if (variant != Variant::Adjusted) {
    throw Error(ErrorCode::InvalidInput, "intervals exist only for plain and adjusted estimates");
  }
  if (kind == CiKind::Basic) return {bias, gamma};

  const double log_len = std::log(1.0 / detail::extrapolation_ratio(n, k, tau));
  if (log_len == 0.0)
    throw Error(ErrorCode::InvalidTau, "refined interval undefined at tau = 1 - k/n");
  const double q = 1.0 / log_len;  // c_n / sqrt(k)
  const double inner = 1.0 + 2.0 * q / (1.0 - gamma) + 2.0 * q * q;
  if (!(inner > 0.0)) throw Error(ErrorCode::InvalidTau, "refined variance term is not positive");
  return {bias * (1.0 + q / (1.0 - gamma)), gamma * std::sqrt(inner)};
}

/// Per-component (1 - alpha) intervals for an estimate. `inflation` scales the
/// variance (serial dependence); 1 reproduces the i.i.d. interval.
inline std::vector<Interval> confidence_interval(const MesEstimate& est, const TailFit& fit,
                                                 CiKind kind, double alpha,
                                                 double inflation = 1.0) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidAlpha, "alpha outside (0,1)");
  if (!(inflation >= 1.0) || !std::isfinite(inflation))
    throw Error(ErrorCode::InvalidInput, "variance inflation must be >= 1");
  detail::check_tau(est.tau);
  if (est.k < 1 || est.k >= est.n) throw Error(ErrorCode::InvalidK, "k outside [1, n-1]");
  IntervalTerms terms = interval_terms(est.variant, fit, kind, est.n, est.k, est.tau);
  terms.scale *= std::sqrt(inflation);
  const double z = special::normal_quantile(1.0 - alpha / 2.0);
  const double base = detail::extrapolation_ratio(est.n, est.k, est.tau);
  std::vector<Interval> out;
  out.reserve(est.theta_hat.size());
  for (double theta : est.theta_hat) {
    const auto [lo, hi] = interval_bounds(theta, base, terms.bias, terms.scale, est.k, z);
    out.push_back({lo, hi, alpha, kind});
  }
  return out;
}

}  // namespace xmes
