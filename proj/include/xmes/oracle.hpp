#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "xmes/copula.hpp"
#include "xmes/error.hpp"
#include "xmes/model.hpp"
#include "xmes/parallel.hpp"
#include "xmes/rng.hpp"
#include "xmes/tail.hpp"

namespace xmes {

struct OracleOptions {
  std::uint64_t batch_draws = std::uint64_t{1} << 20;
  unsigned threads = 0;
};

/// Brute-force Monte Carlo value of E(X_j | R > Q_R(tau)).
struct OracleResult {
  std::vector<double> theta;
  std::vector<double> standard_error;
  double tau = 0.0;
  std::uint64_t total_draws = 0;
  std::uint64_t exceedance_count = 0;
  double radial_quantile = 0.0;  // empirical Q_R(tau), order statistic ceil(tau N)
  double system_es = 0.0;        // E(R | R > Q_R(tau))
  double system_es_se = 0.0;
};

namespace detail {

// Monotone step bounds score -> X_j. For a score s, bound(s) >= X_j(s); the
// bound is +inf beyond the last grid point.
class MarginalBound {
 public:
  MarginalBound(const CopulaSampler& sampler, const Marginal& m) {
    constexpr int kGrid = 1024;
    constexpr double kTopExponent = 14.0;
    scores_.reserve(kGrid);
    values_.reserve(kGrid);
    for (int g = 0; g < kGrid; ++g) {
      const double p = std::pow(10.0, -kTopExponent * g / (kGrid - 1)) * (1.0 - 1e-6);
      scores_.push_back(sampler.score_for_survival(p));
      values_.push_back(quantile_from_survival(m, p));
    }
  }

  double operator()(double score) const {
    const auto it = std::lower_bound(scores_.begin(), scores_.end(), score);
    if (it == scores_.end()) return std::numeric_limits<double>::infinity();
    return values_[static_cast<std::size_t>(it - scores_.begin())];
  }

 private:
  std::vector<double> scores_;
  std::vector<double> values_;
};

// Rows whose radius may still rank among the `keep` largest seen so far.
struct TopRows {
  std::size_t dim = 0;
  std::size_t keep = 0;
  double floor = -std::numeric_limits<double>::infinity();
  std::vector<double> radius;
  std::vector<std::uint64_t> id;
  std::vector<double> rows;

  void push(double r, std::uint64_t draw, std::span<const double> x) {
    radius.push_back(r);
    id.push_back(draw);
    rows.insert(rows.end(), x.begin(), x.end());
    if (radius.size() >= 2 * keep) compact();
  }

  void compact() {
    if (radius.size() <= keep) return;
    std::vector<std::size_t> idx(radius.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep - 1), idx.end(),
                     [&](std::size_t a, std::size_t b) { return radius[a] > radius[b]; });
    idx.resize(keep);
    std::vector<double> r2(keep), rows2(keep * dim);
    std::vector<std::uint64_t> id2(keep);
    for (std::size_t q = 0; q < keep; ++q) {
      r2[q] = radius[idx[q]];
      id2[q] = id[idx[q]];
      std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(idx[q] * dim), dim,
                  rows2.begin() + static_cast<std::ptrdiff_t>(q * dim));
    }
    radius.swap(r2);
    id.swap(id2);
    rows.swap(rows2);
    floor = *std::min_element(radius.begin(), radius.end());
  }
};

}  // namespace detail

/// Single streamed pass over `total_draws` model draws, split into batches
/// of fixed size with seeds derive_seed(seed, batch). Only rows that can
/// still rank among the top ceil(N(1 - tau)) + 1 radii are evaluated
/// exactly; the others are discarded by a monotone upper bound on their
/// radius. The result depends on (spec, tau, N, seed, batch size) only, not
/// on the thread count. Requires nonnegative marginals (all supported
/// families are).
inline OracleResult true_mes(const ModelSpec& spec, double tau, std::uint64_t total_draws,
                             std::uint64_t seed, const OracleOptions& options = {}) {
  validate(spec);
  detail::check_tau(tau);
  const auto n_draws = static_cast<double>(total_draws);
  const auto q_index = static_cast<std::uint64_t>(std::ceil(tau * n_draws));
  if (q_index < 1 || q_index > total_draws)
    throw Error(ErrorCode::InsufficientExceedances, "tau quantile index out of range");
  const std::uint64_t above = total_draws - q_index;
  if (above < 100)
    throw Error(ErrorCode::InsufficientExceedances,
                "only " + std::to_string(above) + " draws above the quantile; increase draws");
  if (options.batch_draws == 0) throw Error(ErrorCode::InvalidInput, "batch size must be positive");

  const std::size_t d = spec.dim();
  const CopulaSampler prototype(spec.copula, d);
  std::vector<detail::MarginalBound> bounds;
  bounds.reserve(d);
  for (const auto& m : spec.marginals) bounds.emplace_back(prototype, m);

  const std::uint64_t batches = (total_draws + options.batch_draws - 1) / options.batch_draws;
  const unsigned workers = static_cast<unsigned>(
      std::min<std::uint64_t>(resolve_threads(options.threads), batches));
  std::vector<detail::TopRows> tops(workers);
  std::vector<CopulaSampler> samplers(workers, prototype);
  for (auto& t : tops) {
    t.dim = d;
    t.keep = static_cast<std::size_t>(above + 1);
  }

  parallel_for(batches, workers, [&](std::size_t b, unsigned w) {
    auto& top = tops[w];
    const auto& sampler = samplers[w];
    Engine g = make_engine(derive_seed(seed, b));
    const std::uint64_t begin = b * options.batch_draws;
    const std::uint64_t end = std::min(total_draws, begin + options.batch_draws);
    std::vector<double> score(d), x(d), bound(d), gate(d, -std::numeric_limits<double>::infinity());
    std::vector<std::size_t> perm(d);
    double gate_floor = -std::numeric_limits<double>::infinity();
    for (std::uint64_t draw = begin; draw < end; ++draw) {
      sampler.draw_scores(g, score);
      if (top.floor > -std::numeric_limits<double>::infinity()) {
        // R > floor needs some X_j > floor/d; gate[j] is that event on the score scale.
        if (top.floor != gate_floor) {
          gate_floor = top.floor;
          for (std::size_t j = 0; j < d; ++j) {
            const double p = marginal_survival(spec.marginals[j], gate_floor / static_cast<double>(d));
            gate[j] = p >= 1.0 ? -std::numeric_limits<double>::infinity()
                               : sampler.score_for_survival(std::min(1.0, p * (1.0 + 1e-9)));
          }
        }
        bool open = false;
        for (std::size_t j = 0; j < d && !open; ++j) open = score[j] > gate[j];
        if (!open) continue;
        double ub = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          bound[j] = bounds[j](score[j]);
          ub += bound[j];
        }
        if (ub * (1.0 + 1e-12) <= top.floor) continue;
        // Evaluate the largest components first and stop as soon as the
        // remaining bounds cannot lift the radius above the floor.
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return bound[a] > bound[b]; });
        double partial = 0.0;
        double rest = ub;
        bool dead = false;
        for (std::size_t q = 0; q < d && !dead; ++q) {
          const std::size_t j = perm[q];
          x[j] = quantile_from_survival(spec.marginals[j], sampler.survival(score[j]));
          partial += x[j];
          rest -= bound[j];
          dead = std::isfinite(rest) && (partial + rest) * (1.0 + 1e-12) <= top.floor;
        }
        if (dead) continue;
      } else {
        for (std::size_t j = 0; j < d; ++j)
          x[j] = quantile_from_survival(spec.marginals[j], sampler.survival(score[j]));
      }
      double r = 0.0;
      for (std::size_t j = 0; j < d; ++j) r += x[j];
      if (r > top.floor) top.push(r, draw, x);
    }
  });

  // Merge and order by (radius desc, draw id asc): independent of scheduling.
  std::vector<double> radius;
  std::vector<std::uint64_t> ids;
  std::vector<double> rows;
  for (auto& t : tops) {
    t.compact();
    radius.insert(radius.end(), t.radius.begin(), t.radius.end());
    ids.insert(ids.end(), t.id.begin(), t.id.end());
    rows.insert(rows.end(), t.rows.begin(), t.rows.end());
  }
  std::vector<std::size_t> idx(radius.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (radius[a] != radius[b]) return radius[a] > radius[b];
    return ids[a] < ids[b];
  });

  OracleResult out;
  out.tau = tau;
  out.total_draws = total_draws;
  out.radial_quantile = radius[idx[above]];
  std::vector<double> sum(d, 0.0), sumsq(d, 0.0);
  double rsum = 0.0, rsumsq = 0.0;
  std::uint64_t count = 0;
  for (std::size_t q = 0; q < above; ++q) {
    const std::size_t e = idx[q];
    if (!(radius[e] > out.radial_quantile)) break;
    ++count;
    rsum += radius[e];
    rsumsq += radius[e] * radius[e];
    for (std::size_t j = 0; j < d; ++j) {
      const double v = rows[e * d + j];
      sum[j] += v;
      sumsq[j] += v * v;
    }
  }
  if (count < 100)
    throw Error(ErrorCode::InsufficientExceedances, "fewer than 100 strict exceedances");
  const double c = static_cast<double>(count);
  auto se = [c](double s, double ss) {
    const double mean = s / c;
    const double var = std::max(0.0, (ss - c * mean * mean) / (c - 1.0));
    return std::sqrt(var / c);
  };
  out.exceedance_count = count;
  out.theta.resize(d);
  out.standard_error.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    out.theta[j] = sum[j] / c;
    out.standard_error[j] = se(sum[j], sumsq[j]);
  }
  out.system_es = rsum / c;
  out.system_es_se = se(rsum, rsumsq);
  return out;
}

}  // namespace xmes
