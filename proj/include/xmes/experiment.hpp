#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xmes/data_matrix.hpp"
#include "xmes/error.hpp"
#include "xmes/interval.hpp"
#include "xmes/mes.hpp"
#include "xmes/model.hpp"
#include "xmes/parallel.hpp"
#include "xmes/radial.hpp"
#include "xmes/rng.hpp"
#include "xmes/serial.hpp"
#include "xmes/tail.hpp"

namespace xmes {

/// One confidence-interval construction: kind x base estimator, optionally
/// with the serial variance inflation at truncation lag `serial_lags`.
struct IntervalSpec {
  CiKind kind = CiKind::Refined;
  Variant base = Variant::Plain;
  std::size_t serial_lags = 0;

  friend bool operator==(const IntervalSpec&, const IntervalSpec&) = default;
};

inline std::string label(const IntervalSpec& s) {
  std::string out = "ci_" + std::string(to_string(s.kind)) + "_" + std::string(to_string(s.base));
  if (s.serial_lags > 0) out += "_serial" + std::to_string(s.serial_lags);
  return out;
}

inline std::vector<IntervalSpec> all_interval_specs() {
  return {{CiKind::Basic, Variant::Plain, 0},
          {CiKind::Basic, Variant::Adjusted, 0},
          {CiKind::Refined, Variant::Plain, 0},
          {CiKind::Refined, Variant::Adjusted, 0}};
}

/// k = round(n p / 100) for p = 1..30, deduplicated, restricted to [1, n-1].
inline std::vector<std::size_t> default_k_grid(std::size_t n) {
  std::vector<std::size_t> grid;
  for (int p = 1; p <= 30; ++p) {
    const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * p / 100.0));
    if (k >= 1 && k < n && (grid.empty() || grid.back() != k)) grid.push_back(k);
  }
  return grid;
}

/// k = round(n f) for each fraction f.
inline std::vector<std::size_t> k_grid_from_fractions(std::size_t n, std::span<const double> fractions) {
  std::vector<std::size_t> grid;
  for (double f : fractions) grid.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(n) * f)));
  return grid;
}

using DataGenerator = std::function<DataMatrix(std::uint64_t seed)>;

struct ExperimentConfig {
  ModelSpec model;
  std::size_t n = 500;
  std::size_t replicates = 1000;
  double tau = 0.998;
  std::vector<std::size_t> k_grid;
  std::vector<Variant> estimators{Variant::Plain, Variant::Adjusted, Variant::Emp, Variant::Cai};
  std::vector<IntervalSpec> intervals = all_interval_specs();
  double alpha = 0.05;
  std::vector<std::size_t> components{0};  // 0-based; empty means every component
  std::uint64_t master_seed = 1;
  std::vector<double> truth;               // per component; NaN where unknown
  std::optional<std::size_t> second_order_level;
  unsigned threads = 0;
  DataGenerator generator;                 // overrides `model` sampling when set
};

struct MetricPoint {
  std::size_t k = 0;
  double squared_bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  std::size_t used = 0;
  std::size_t failures = 0;
};

struct EstimatorCurve {
  Variant estimator = Variant::Plain;
  std::size_t component = 0;
  std::vector<MetricPoint> points;
};

struct CoveragePoint {
  std::size_t k = 0;
  double non_coverage = 0.0;
  std::size_t used = 0;
  std::size_t failures = 0;
};

struct CoverageCurve {
  IntervalSpec interval;
  std::size_t component = 0;
  std::vector<CoveragePoint> points;
};

struct CurveResult {
  std::string model;
  std::size_t n = 0;
  std::size_t replicates = 0;
  double tau = 0.0;
  double alpha = 0.05;
  std::vector<std::size_t> k_grid;
  std::vector<EstimatorCurve> estimators;
  std::vector<CoverageCurve> coverage;

  const EstimatorCurve* find(Variant v, std::size_t component) const {
    for (const auto& c : estimators)
      if (c.estimator == v && c.component == component) return &c;
    return nullptr;
  }
  const CoverageCurve* find(const IntervalSpec& s, std::size_t component) const {
    for (const auto& c : coverage)
      if (c.interval == s && c.component == component) return &c;
    return nullptr;
  }
};

namespace detail {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Estimates (or 0/1 coverage flags) of one replicate, NaN marking failures.
// Layout: [slot][component][grid point].
struct ReplicateRecord {
  std::vector<double> estimates;
  std::vector<double> covered;
};

inline double estimate_one(Variant v, const DataMatrix& x, const RadialSample& r, std::size_t j,
                           std::size_t k, double tau, const std::optional<SecondOrder>& so,
                           std::vector<std::optional<MesEstimate>>& cache) {
  switch (v) {
    case Variant::Plain: {
      if (!cache[0]) cache[0] = mes_estimate(r, k, tau);
      return cache[0]->theta_hat[j];
    }
    case Variant::Adjusted: {
      if (!so) return kNaN;
      if (!cache[1]) cache[1] = mes_estimate_adjusted(r, k, *so, tau);
      return cache[1]->theta_hat[j];
    }
    case Variant::Emp: return competitor_emp(x, r, j, k, tau, hill_estimate(r, k));
    case Variant::Cai: return competitor_cai(x, r, j, k, tau, hill_estimate(r, k));
  }
  return kNaN;
}

inline ReplicateRecord evaluate_replicate(const ExperimentConfig& cfg,
                                          std::span<const std::size_t> comps,
                                          const DataMatrix& x) {
  const std::size_t nc = comps.size();
  const std::size_t ng = cfg.k_grid.size();
  ReplicateRecord rec;
  rec.estimates.assign(cfg.estimators.size() * nc * ng, kNaN);
  rec.covered.assign(cfg.intervals.size() * nc * ng, kNaN);

  const RadialSample r = radial_decompose(x);
  std::optional<SecondOrder> so;
  try {
    so = second_order_params(r, cfg.second_order_level.value_or(default_second_order_level(r)));
  } catch (const Error&) {
  }

  for (std::size_t g = 0; g < ng; ++g) {
    const std::size_t k = cfg.k_grid[g];
    std::vector<std::optional<MesEstimate>> cache(2);
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e)
      for (std::size_t c = 0; c < nc; ++c) {
        try {
          rec.estimates[(e * nc + c) * ng + g] =
              estimate_one(cfg.estimators[e], x, r, comps[c], k, cfg.tau, so, cache);
        } catch (const Error&) {
        }
      }
    for (std::size_t i = 0; i < cfg.intervals.size(); ++i) {
      const IntervalSpec& spec = cfg.intervals[i];
      try {
        if (!so) continue;
        const TailFit fit{hill_estimate(r, k), k, so};
        const std::size_t slot = spec.base == Variant::Plain ? 0 : 1;
        if (!cache[slot])
          cache[slot] = slot == 0 ? mes_estimate(r, k, cfg.tau) : mes_estimate_adjusted(r, k, *so, cfg.tau);
        const double inflation =
            spec.serial_lags > 0 ? variance_inflation(r, k, spec.serial_lags).inflation : 1.0;
        const auto ci = confidence_interval(*cache[slot], fit, spec.kind, cfg.alpha, inflation);
        for (std::size_t c = 0; c < nc; ++c) {
          const double truth = cfg.truth[comps[c]];
          const auto& iv = ci[comps[c]];
          rec.covered[(i * nc + c) * ng + g] = (iv.lower <= truth && truth <= iv.upper) ? 1.0 : 0.0;
        }
      } catch (const Error&) {
      }
    }
  }
  return rec;
}

}  // namespace detail

inline std::vector<std::size_t> resolve_components(const ExperimentConfig& cfg, std::size_t d) {
  std::vector<std::size_t> comps = cfg.components;
  if (comps.empty())
    for (std::size_t j = 0; j < d; ++j) comps.push_back(j);
  for (std::size_t j : comps)
    if (j >= d) throw Error(ErrorCode::InvalidInput, "component index out of range");
  return comps;
}

/// Monte Carlo squared bias, variance, MSE and interval non-coverage over
/// `replicates` samples. Replicate m uses seed derive_seed(master_seed, m),
/// and aggregation runs in replicate order, so the result does not depend on
/// the thread count. Failed fits are dropped per estimator and counted.
inline CurveResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.replicates == 0) throw Error(ErrorCode::InvalidInput, "at least one replicate is required");
  if (cfg.k_grid.empty()) throw Error(ErrorCode::InvalidK, "empty k grid");
  for (std::size_t g = 0; g < cfg.k_grid.size(); ++g) {
    if (cfg.k_grid[g] < 1 || cfg.k_grid[g] >= cfg.n) throw Error(ErrorCode::InvalidK, "k grid entry outside [1, n-1]");
    if (g > 0 && cfg.k_grid[g] <= cfg.k_grid[g - 1])
      throw Error(ErrorCode::InvalidK, "k grid must be strictly increasing");
  }
  detail::check_tau(cfg.tau);
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(ErrorCode::InvalidAlpha, "alpha outside (0,1)");
  for (const auto& s : cfg.intervals)
    if (s.base != Variant::Plain && s.base != Variant::Adjusted)
      throw Error(ErrorCode::InvalidInput, "intervals are defined for plain and adjusted estimates only");

  const std::size_t d = cfg.generator ? cfg.truth.size() : cfg.model.dim();
  const std::vector<std::size_t> comps = resolve_components(cfg, d);
  if (cfg.truth.size() != d) throw Error(ErrorCode::MissingTruth, "truth must have one entry per component");
  for (std::size_t j : comps)
    if (!std::isfinite(cfg.truth[j]))
      throw Error(ErrorCode::MissingTruth, "no truth for component " + std::to_string(j + 1));
  if (!cfg.generator) validate(cfg.model);

  std::vector<detail::ReplicateRecord> records(cfg.replicates);
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t m, unsigned) {
    const std::uint64_t seed = derive_seed(cfg.master_seed, m);
    const DataMatrix x = cfg.generator ? cfg.generator(seed) : sample_model(cfg.model, cfg.n, seed).data;
    if (x.cols() != d || x.rows() != cfg.n)
      throw Error(ErrorCode::InvalidInput, "generated sample has the wrong shape");
    records[m] = detail::evaluate_replicate(cfg, comps, x);
  });

  const std::size_t nc = comps.size();
  const std::size_t ng = cfg.k_grid.size();
  CurveResult out;
  out.model = cfg.model.name;
  out.n = cfg.n;
  out.replicates = cfg.replicates;
  out.tau = cfg.tau;
  out.alpha = cfg.alpha;
  out.k_grid = cfg.k_grid;

  for (std::size_t e = 0; e < cfg.estimators.size(); ++e)
    for (std::size_t c = 0; c < nc; ++c) {
      EstimatorCurve curve{cfg.estimators[e], comps[c], {}};
      const double truth = cfg.truth[comps[c]];
      for (std::size_t g = 0; g < ng; ++g) {
        MetricPoint pt;
        pt.k = cfg.k_grid[g];
        double sum = 0.0;
        for (const auto& rec : records) {
          const double v = rec.estimates[(e * nc + c) * ng + g];
          if (std::isnan(v)) ++pt.failures;
          else { ++pt.used; sum += v; }
        }
        if (pt.used == 0) {
          pt.squared_bias = pt.variance = pt.mse = detail::kNaN;
        } else {
          const double u = static_cast<double>(pt.used);
          const double mean = sum / u;
          double var = 0.0, mse = 0.0;
          for (const auto& rec : records) {
            const double v = rec.estimates[(e * nc + c) * ng + g];
            if (std::isnan(v)) continue;
            var += (v - mean) * (v - mean);
            mse += (v - truth) * (v - truth);
          }
          pt.squared_bias = (mean - truth) * (mean - truth);
          pt.variance = var / u;
          pt.mse = mse / u;
        }
        curve.points.push_back(pt);
      }
      out.estimators.push_back(std::move(curve));
    }

  for (std::size_t i = 0; i < cfg.intervals.size(); ++i)
    for (std::size_t c = 0; c < nc; ++c) {
      CoverageCurve curve{cfg.intervals[i], comps[c], {}};
      for (std::size_t g = 0; g < ng; ++g) {
        CoveragePoint pt;
        pt.k = cfg.k_grid[g];
        double hits = 0.0;
        for (const auto& rec : records) {
          const double v = rec.covered[(i * nc + c) * ng + g];
          if (std::isnan(v)) ++pt.failures;
          else { ++pt.used; hits += v; }
        }
        pt.non_coverage = pt.used ? 1.0 - hits / static_cast<double>(pt.used) : detail::kNaN;
        curve.points.push_back(pt);
      }
      out.coverage.push_back(std::move(curve));
    }
  return out;
}

struct MseEnvelope {
  std::vector<std::size_t> k_grid;
  std::vector<double> max;
  std::vector<double> avg;
};

/// Pointwise maximum and mean MSE across per-component curves.
inline MseEnvelope max_avg_mse(std::span<const EstimatorCurve> curves) {
  if (curves.empty()) throw Error(ErrorCode::InvalidInput, "no curves");
  MseEnvelope out;
  for (const auto& p : curves.front().points) out.k_grid.push_back(p.k);
  const std::size_t ng = out.k_grid.size();
  for (const auto& c : curves) {
    if (c.points.size() != ng) throw Error(ErrorCode::GridMismatch, "curves have different grid sizes");
    for (std::size_t g = 0; g < ng; ++g)
      if (c.points[g].k != out.k_grid[g]) throw Error(ErrorCode::GridMismatch, "curves have different k grids");
  }
  out.max.assign(ng, -std::numeric_limits<double>::infinity());
  out.avg.assign(ng, 0.0);
  for (const auto& c : curves)
    for (std::size_t g = 0; g < ng; ++g) {
      out.max[g] = std::max(out.max[g], c.points[g].mse);
      out.avg[g] += c.points[g].mse;
    }
  for (double& v : out.avg) v /= static_cast<double>(curves.size());
  return out;
}

}  // namespace xmes
