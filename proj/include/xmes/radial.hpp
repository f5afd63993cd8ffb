#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "xmes/data_matrix.hpp"
#include "xmes/error.hpp"

namespace xmes {

/// Radial/angular split of a data panel under the L1 norm: R_i is the plain
/// row sum and W_i = X_i / R_i. Rows with R_i == 0 have no angle (NaN).
struct RadialSample {
  std::vector<double> radii;        // time/observation order
  std::vector<std::size_t> order;   // stable ascending permutation of radii
  std::vector<double> sorted;       // radii[order[i]]
  std::vector<double> angular;      // n x d, row-major
  std::size_t dim = 0;

  std::size_t size() const noexcept { return radii.size(); }

  bool has_angle(std::size_t i) const noexcept { return radii[i] != 0.0; }

  double angle(std::size_t i, std::size_t j) const noexcept { return angular[i * dim + j]; }

  /// R_(i,n) with 1-based i.
  double order_stat(std::size_t i) const noexcept { return sorted[i - 1]; }

  /// Intermediate threshold R_(n-k,n).
  double threshold(std::size_t k) const noexcept { return sorted[size() - k - 1]; }
};

inline RadialSample radial_decompose(const DataMatrix& x) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  RadialSample out;
  out.dim = d;
  out.radii.resize(n);
  out.angular.assign(n * d, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (double v : x.row(i)) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, "non-finite entry");
      r += v;
    }
    out.radii[i] = r;
    if (r != 0.0)
      for (std::size_t j = 0; j < d; ++j) out.angular[i * d + j] = x(i, j) / r;
  }
  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return out.radii[a] < out.radii[b]; });
  out.sorted.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.sorted[i] = out.radii[out.order[i]];
  return out;
}

/// Univariate convenience: the series itself is the radius, every angle is 1.
inline RadialSample radial_decompose(std::span<const double> series) {
  return radial_decompose(DataMatrix::from_column(series));
}

}  // namespace xmes
