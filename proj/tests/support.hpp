#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "xmes/data_matrix.hpp"
#include "xmes/rng.hpp"

namespace xmes::test {

// Kendall's tau-a for tie-free pairs, O(n log n) via merge-sort inversion count.
inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n), hi = std::min(lo + 2 * width, n);
      std::size_t a = lo, b = mid, o = lo;
      while (a < mid && b < hi) {
        if (ys[b] < ys[a]) {
          swaps += mid - a;
          buf[o++] = ys[b++];
        } else {
          buf[o++] = ys[a++];
        }
      }
      while (a < mid) buf[o++] = ys[a++];
      while (b < hi) buf[o++] = ys[b++];
    }
    ys.swap(buf);
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return 1.0 - 2.0 * static_cast<double>(swaps) / pairs;
}

// Brute-force reference for kendall_tau.
inline double kendall_tau_naive(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) s += ((x[i] - x[j]) * (y[i] - y[j]) > 0) ? 1.0 : -1.0;
  return s / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

// sup |F_n(u) - u| against Uniform(0,1).
inline double ks_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double lo = static_cast<double>(i) / n, hi = static_cast<double>(i + 1) / n;
    d = std::max({d, std::abs(u[i] - lo), std::abs(hi - u[i])});
  }
  return d;
}

// Exact Pareto draws (1-U)^(-gamma).
inline std::vector<double> pareto_sample(std::size_t n, double gamma, std::uint64_t seed) {
  Engine g = make_engine(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = std::pow(open_uniform(g), -gamma);
  return v;
}

inline std::vector<double> uniform_vector(std::size_t n, double lo, double hi, std::uint64_t seed) {
  Engine g = make_engine(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * open_uniform(g);
  return v;
}

// Random positive panel with Pareto-like rows, tie-free with probability one.
inline DataMatrix random_panel(std::size_t n, std::size_t d, std::uint64_t seed, double gamma = 0.3) {
  Engine g = make_engine(seed);
  std::vector<double> v(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const double scale = std::pow(open_uniform(g), -gamma);
    for (std::size_t j = 0; j < d; ++j) v[i * d + j] = scale * (0.1 + open_uniform(g));
  }
  return DataMatrix(n, d, std::move(v));
}

// Mean-of-log-excesses Hill form, the classical equivalent of the weighted form.
inline double hill_mean_of_logs(std::vector<double> r, std::size_t k) {
  std::sort(r.begin(), r.end());
  const std::size_t n = r.size();
  const double thr = std::log(r[n - k - 1]);
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(r[n - 1 - i]) - thr;
  return s / static_cast<double>(k);
}

}  // namespace xmes::test
