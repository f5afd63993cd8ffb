#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "xmes/error.hpp"
#include "xmes/radial.hpp"
#include "xmes/tail.hpp"

namespace xmes {

struct SerialAdjustment {
  std::vector<double> r_hat;  // r_hat[t-1] estimates r_t(1,1)
  double inflation = 1.0;     // 1 + 2 sum_t r_hat
  std::size_t lags = 0;
};

/// Empirical lag-t tail dependence of the radius series, centred at its
/// value under independence and floored at zero:
///   max(0, (1/k) #{i : R_i > R_(n-k,n) and R_{i+t} > R_(n-k,n)} - (n-t) k / n^2).
/// Radii are taken in observation order.
inline double serial_r_hat(const RadialSample& r, std::size_t k, std::size_t t) {
  detail::check_k(r, k);
  if (t < 1 || t >= r.size())
    throw Error(ErrorCode::InvalidLag, "lag " + std::to_string(t) + " outside [1, n-1]");
  const double thr = r.threshold(k);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i + t < r.size(); ++i)
    if (r.radii[i] > thr && r.radii[i + t] > thr) ++pairs;
  const double n = static_cast<double>(r.size());
  const double kd = static_cast<double>(k);
  const double baseline = (n - static_cast<double>(t)) * kd / (n * n);
  return std::max(0.0, static_cast<double>(pairs) / kd - baseline);
}

/// min(floor(sqrt(n)), 50)
inline std::size_t default_serial_lag(std::size_t n) {
  return std::min<std::size_t>(static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n)))), 50);
}

inline SerialAdjustment variance_inflation(const RadialSample& r, std::size_t k, std::size_t lags) {
  detail::check_k(r, k);
  if (lags >= r.size()) throw Error(ErrorCode::InvalidLag, "truncation lag must be below n");
  SerialAdjustment out;
  out.lags = lags;
  out.r_hat.reserve(lags);
  double sum = 0.0;
  for (std::size_t t = 1; t <= lags; ++t) {
    out.r_hat.push_back(serial_r_hat(r, k, t));
    sum += out.r_hat.back();
  }
  out.inflation = 1.0 + 2.0 * sum;
  return out;
}

}  // namespace xmes
