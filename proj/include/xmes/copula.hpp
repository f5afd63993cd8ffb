#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "xmes/error.hpp"
#include "xmes/rng.hpp"
#include "xmes/special.hpp"

namespace xmes {

struct Clayton {
  double delta;
};

struct Gumbel {
  double theta;
};

struct Joe {
  double theta;
};

/// Student-t copula; `correlation` is d x d row-major.
struct StudentT {
  std::vector<double> correlation;
  double dof;
};

using Copula = std::variant<Clayton, Gumbel, Joe, StudentT>;

/// Equicorrelation matrix with unit diagonal.
inline std::vector<double> equicorrelation(std::size_t d, double rho) {
  std::vector<double> m(d * d, rho);
  for (std::size_t i = 0; i < d; ++i) m[i * d + i] = 1.0;
  return m;
}

/// Sibuya(alpha) law, P(V > k) = prod_{j<=k} (1 - alpha/j), by inversion.
/// Returned as a double because the law has infinite mean for alpha < 1.
inline double sample_sibuya(Engine& g, double alpha) {
  if (alpha >= 1.0) return 1.0;
  const double u = open_uniform(g);
  double surv = 1.0;
  for (int k = 1; k <= 4096; ++k) {
    surv *= 1.0 - alpha / k;
    if (surv <= u) return k;
  }
  const double lg = boost::math::lgamma(1.0 - alpha);
  auto log_surv = [&](double k) {
    return boost::math::lgamma(k + 1.0 - alpha) - boost::math::lgamma(k + 1.0) - lg;
  };
  const double log_u = std::log(u);
  double lo = 4096.0, hi = 8192.0;
  while (log_surv(hi) > log_u) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return hi;
  }
  while (hi - lo > 1.0) {
    const double mid = std::floor(lo + (hi - lo) / 2.0);
    if (log_surv(mid) > log_u) lo = mid;
    else hi = mid;
  }
  return hi;
}

/// Positive stable variable with Laplace transform exp(-t^alpha), 0 < alpha <= 1
/// (Chambers-Mallows-Stuck with one uniform angle and one exponential).
inline double sample_positive_stable(Engine& g, double alpha) {
  if (alpha >= 1.0) return 1.0;
  const double w = std::numbers::pi * open_uniform(g);
  const double e = standard_exponential(g);
  return std::sin(alpha * w) / std::pow(std::sin(w), 1.0 / alpha) *
         std::pow(std::sin((1.0 - alpha) * w) / e, (1.0 - alpha) / alpha);
}

/// Draws copula rows as per-component scores that are strictly increasing in
/// the uniform U_j, plus exact maps score -> U and score -> 1 - U. Working on
/// scores lets callers threshold the upper tail without paying for the
/// distribution function on every draw.
class CopulaSampler {
 public:
  CopulaSampler(const Copula& copula, std::size_t dim) : dim_(dim) {
    if (dim == 0) throw Error(ErrorCode::InvalidModel, "copula dimension must be positive");
    std::visit([this](const auto& c) { init(c); }, copula);
  }

  std::size_t dim() const noexcept { return dim_; }

  void draw_scores(Engine& g, std::span<double> score) const {
    switch (kind_) {
      case Kind::Clayton: {
        boost::random::gamma_distribution<double> frailty(1.0 / param_, 1.0);
        const double v = frailty(g);
        for (double& s : score) s = -standard_exponential(g) / v;
        break;
      }
      case Kind::Gumbel: {
        const double v = sample_positive_stable(g, 1.0 / param_);
        for (double& s : score) s = -standard_exponential(g) / v;
        break;
      }
      case Kind::Joe: {
        const double v = sample_sibuya(g, 1.0 / param_);
        for (double& s : score) s = -standard_exponential(g) / v;
        break;
      }
      case Kind::StudentT: {
        boost::random::normal_distribution<double> normal;
        boost::random::chi_squared_distribution<double> chi2(param_);
        for (std::size_t i = 0; i < dim_; ++i) z_[i] = normal(g);
        const double scale = 1.0 / std::sqrt(chi2(g) / param_);
        for (std::size_t i = 0; i < dim_; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j <= i; ++j) acc += chol_[i * dim_ + j] * z_[j];
          score[i] = acc * scale;
        }
        break;
      }
    }
  }

  double uniform(double score) const {
    switch (kind_) {
      case Kind::Clayton: return std::exp(-std::log1p(-score) / param_);
      case Kind::Gumbel: return std::exp(-std::pow(-score, 1.0 / param_));
      case Kind::Joe: return 1.0 - std::pow(-std::expm1(score), 1.0 / param_);
      case Kind::StudentT: return special::student_t_cdf(param_, score);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  double survival(double score) const {
    switch (kind_) {
      case Kind::Clayton: return -std::expm1(-std::log1p(-score) / param_);
      case Kind::Gumbel: return -std::expm1(-std::pow(-score, 1.0 / param_));
      case Kind::Joe: return std::pow(-std::expm1(score), 1.0 / param_);
      case Kind::StudentT: return special::student_t_survival(param_, score);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  /// Inverse of survival(): the score whose upper-tail probability is p.
  double score_for_survival(double p) const {
    switch (kind_) {
      case Kind::Clayton: return -std::expm1(-param_ * std::log1p(-p));
      case Kind::Gumbel: return -std::pow(-std::log1p(-p), param_);
      case Kind::Joe: return std::log1p(-std::pow(p, param_));
      case Kind::StudentT: return special::student_t_upper_quantile(param_, p);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

 private:
  enum class Kind { Clayton, Gumbel, Joe, StudentT };

  void init(const Clayton& c) {
    if (!(c.delta > 0.0) || !std::isfinite(c.delta))
      throw Error(ErrorCode::InvalidModel, "Clayton delta must be > 0");
    kind_ = Kind::Clayton;
    param_ = c.delta;
  }
  void init(const Gumbel& c) {
    if (!(c.theta >= 1.0) || !std::isfinite(c.theta))
      throw Error(ErrorCode::InvalidModel, "Gumbel theta must be >= 1");
    kind_ = Kind::Gumbel;
    param_ = c.theta;
  }
  void init(const Joe& c) {
    if (!(c.theta >= 1.0) || !std::isfinite(c.theta))
      throw Error(ErrorCode::InvalidModel, "Joe theta must be >= 1");
    kind_ = Kind::Joe;
    param_ = c.theta;
  }
  void init(const StudentT& c) {
    if (!(c.dof > 0.0) || !std::isfinite(c.dof))
      throw Error(ErrorCode::InvalidModel, "Student-t dof must be > 0");
    if (c.correlation.size() != dim_ * dim_)
      throw Error(ErrorCode::InvalidModel, "correlation matrix size does not match dimension");
    const auto& m = c.correlation;
    for (std::size_t i = 0; i < dim_; ++i) {
      if (m[i * dim_ + i] != 1.0) throw Error(ErrorCode::InvalidModel, "correlation diagonal must be 1");
      for (std::size_t j = 0; j < i; ++j)
        if (m[i * dim_ + j] != m[j * dim_ + i] || !(std::abs(m[i * dim_ + j]) < 1.0))
          throw Error(ErrorCode::InvalidModel, "correlation matrix must be symmetric with |r| < 1");
    }
    chol_.assign(dim_ * dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double acc = m[i * dim_ + j];
        for (std::size_t q = 0; q < j; ++q) acc -= chol_[i * dim_ + q] * chol_[j * dim_ + q];
        if (i == j) {
          if (!(acc > 0.0))
            throw Error(ErrorCode::InvalidModel, "correlation matrix is not positive definite");
          chol_[i * dim_ + i] = std::sqrt(acc);
        } else {
          chol_[i * dim_ + j] = acc / chol_[j * dim_ + j];
        }
      }
    }
    z_.resize(dim_);
    kind_ = Kind::StudentT;
    param_ = c.dof;
  }

  std::size_t dim_;
  Kind kind_ = Kind::Clayton;
  double param_ = 1.0;
  std::vector<double> chol_;
  mutable std::vector<double> z_;  // scratch; samplers are not shared across threads
};

}  // namespace xmes
