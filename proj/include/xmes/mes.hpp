#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xmes/data_matrix.hpp"
#include "xmes/error.hpp"
#include "xmes/radial.hpp"
#include "xmes/tail.hpp"

namespace xmes {

enum class Variant { Plain, Adjusted, Emp, Cai };
enum class CiKind { Basic, Refined };

constexpr std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::Plain: return "plain";
    case Variant::Adjusted: return "adjusted";
    case Variant::Emp: return "emp";
    case Variant::Cai: return "cai";
  }
  return "?";
}

constexpr std::string_view to_string(CiKind k) noexcept {
  return k == CiKind::Basic ? "basic" : "refined";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "plain") return Variant::Plain;
  if (s == "adjusted") return Variant::Adjusted;
  if (s == "emp") return Variant::Emp;
  if (s == "cai") return Variant::Cai;
  throw Error(ErrorCode::InvalidInput, "unknown estimator '" + std::string(s) + "'");
}

inline CiKind parse_ci_kind(std::string_view s) {
  if (s == "basic") return CiKind::Basic;
  if (s == "refined") return CiKind::Refined;
  throw Error(ErrorCode::InvalidInput, "unknown interval kind '" + std::string(s) + "'");
}

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double alpha = 0.05;
  CiKind kind = CiKind::Refined;
};

/// Per-component MES estimates at level tau together with the pieces they
/// were assembled from.
struct MesEstimate {
  std::vector<double> theta_hat;
  Variant variant = Variant::Plain;
  double tau = 0.0;
  std::size_t k = 0;
  std::size_t n = 0;
  double gamma_hat = 0.0;        // tail index used in the denominator
  double radial_quantile = 0.0;  // Q_R(tau) estimate
  std::vector<double> angular;   // w_j estimates
  std::size_t exceedances = 0;   // strict exceedances of R_(n-k,n)
  std::optional<std::vector<Interval>> ci;
};

namespace detail {

inline void require_finite_mean(double gamma) {
  if (!(gamma < 1.0))
    throw Error(ErrorCode::HeavyTailUnbounded,
                "tail index estimate " + std::to_string(gamma) + " >= 1");
}

}  // namespace detail

inline MesEstimate mes_estimate(const RadialSample& r, std::size_t k, double tau) {
  const double gamma = hill_estimate(r, k);
  detail::require_finite_mean(gamma);
  MesEstimate est;
  est.variant = Variant::Plain;
  est.tau = tau;
  est.k = k;
  est.n = r.size();
  est.gamma_hat = gamma;
  est.radial_quantile = weissman_quantile(r, k, tau, gamma);
  est.angular = angular_mean(r, k);
  est.exceedances = exceedance_count(r, k);
  est.theta_hat.resize(r.dim);
  for (std::size_t j = 0; j < r.dim; ++j)
    est.theta_hat[j] = est.radial_quantile * est.angular[j] / (1.0 - gamma);
  return est;
}

inline MesEstimate mes_estimate(const DataMatrix& x, std::size_t k, double tau) {
  return mes_estimate(radial_decompose(x), k, tau);
}

/// Bias-corrected estimator from a precomputed second-order pair. beta is on
/// the scale A(t) = gamma beta t^rho, so the quantile correction receives
/// gamma_adj * beta.
inline MesEstimate mes_estimate_adjusted(const RadialSample& r, std::size_t k,
                                         const SecondOrder& so, double tau) {
  const double gamma = hill_estimate(r, k);
  const double gamma_adj = adjusted_gamma(gamma, so.beta, so.rho, r.size(), k);
  detail::require_finite_mean(gamma_adj);
  MesEstimate est;
  est.variant = Variant::Adjusted;
  est.tau = tau;
  est.k = k;
  est.n = r.size();
  est.gamma_hat = gamma_adj;
  est.radial_quantile = adjusted_quantile(r, k, tau, gamma_adj, gamma_adj * so.beta, so.rho);
  est.angular = angular_mean(r, k);
  est.exceedances = exceedance_count(r, k);
  est.theta_hat.resize(r.dim);
  for (std::size_t j = 0; j < r.dim; ++j)
    est.theta_hat[j] = est.radial_quantile * est.angular[j] / (1.0 - gamma_adj);
  return est;
}

inline MesEstimate mes_estimate_adjusted(const DataMatrix& x, std::size_t k, std::size_t s,
                                         double tau) {
  const RadialSample r = radial_decompose(x);
  return mes_estimate_adjusted(r, k, second_order_params(r, s), tau);
}

namespace detail {

inline void check_column(const DataMatrix& x, std::size_t j) {
  if (j >= x.cols())
    throw Error(ErrorCode::InvalidInput, "component index " + std::to_string(j) + " out of range");
}

}  // namespace detail

/// (k/(n(1-tau)))^gamma * (1/k) sum_i X_ij 1(R_i > R_(n-k,n)), with gamma
/// supplied by the caller (the radial Hill estimate).
inline double competitor_emp(const DataMatrix& x, const RadialSample& r, std::size_t j,
                             std::size_t k, double tau, double gamma) {
  detail::check_column(x, j);
  detail::check_k(r, k);
  detail::check_tau(tau);
  const double thr = r.threshold(k);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    if (r.radii[i] > thr) acc += x(i, j);
  const double inv_ratio = 1.0 / detail::extrapolation_ratio(x.rows(), k, tau);
  return std::pow(inv_ratio, gamma) * acc / static_cast<double>(k);
}

inline double competitor_emp(const DataMatrix& x, std::size_t j, std::size_t k, double tau) {
  const RadialSample r = radial_decompose(x);
  return competitor_emp(x, r, j, k, tau, hill_estimate(r, k));
}

/// Ascending ranks 1..n of a column; tied values all receive the largest rank
/// of their group.
inline std::vector<std::size_t> max_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<std::size_t> rank(n);
  std::size_t pos = 0;
  while (pos < n) {
    std::size_t end = pos + 1;
    while (end < n && v[idx[end]] == v[idx[pos]]) ++end;
    for (std::size_t q = pos; q < end; ++q) rank[idx[q]] = end;
    pos = end;
  }
  return rank;
}

/// Rank-based competitor:
///   (k/(n(1-tau)))^gamma X_(n-k) (1/k) sum_i 1(R_i > R_(n-k)) ((n - rank_i + 1)/k)^(-gamma)
/// where ranks and X_(n-k) refer to column j.
inline double competitor_cai(const DataMatrix& x, const RadialSample& r, std::size_t j,
                             std::size_t k, double tau, double gamma) {
  detail::check_column(x, j);
  detail::check_k(r, k);
  detail::check_tau(tau);
  const std::size_t n = x.rows();
  const std::vector<double> col = x.column(j);
  const std::vector<std::size_t> rank = max_ranks(col);
  std::vector<double> sorted_col(col);
  std::sort(sorted_col.begin(), sorted_col.end());
  const double x_thr = sorted_col[n - k - 1];
  const double kd = static_cast<double>(k);
  const double thr = r.threshold(k);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (r.radii[i] > thr)
      acc += std::pow(static_cast<double>(n - rank[i] + 1) / kd, -gamma);
  const double inv_ratio = 1.0 / detail::extrapolation_ratio(n, k, tau);
  return std::pow(inv_ratio, gamma) * x_thr * acc / kd;
}

inline double competitor_cai(const DataMatrix& x, std::size_t j, std::size_t k, double tau) {
  const RadialSample r = radial_decompose(x);
  return competitor_cai(x, r, j, k, tau, hill_estimate(r, k));
}

}  // namespace xmes
