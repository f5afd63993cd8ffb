#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "xmes/error.hpp"
#include "xmes/special.hpp"

namespace xmes {

/// |T| for T ~ Student-t(dof); quantile F^{-1}((u+1)/2). Tail index 1/dof.
struct HalfT {
  double dof;
};

/// Survival (1 + x^c)^(-k). Tail index 1/(c k).
struct Burr {
  double c;
  double k;
};

/// Survival 1 - exp(-x^(-alpha)). Tail index 1/alpha.
struct Frechet {
  double alpha;
};

/// Survival x^(-1/gamma) on [1, inf).
struct Pareto {
  double gamma;
};

using Marginal = std::variant<HalfT, Burr, Frechet, Pareto>;

// |T| for T ~ t(dof); the same law as HalfT.
using StudentTFolded = HalfT;

inline double tail_index(const Marginal& m) {
  return std::visit(
      [](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, HalfT>) return 1.0 / f.dof;
        else if constexpr (std::is_same_v<F, Burr>) return 1.0 / (f.c * f.k);
        else if constexpr (std::is_same_v<F, Frechet>) return 1.0 / f.alpha;
        else return f.gamma;
      },
      m);
}

inline void validate(const Marginal& m) {
  const bool ok = std::visit(
      [](const auto& f) -> bool {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, HalfT>) return f.dof > 0.0 && std::isfinite(f.dof);
        else if constexpr (std::is_same_v<F, Burr>) return f.c > 0.0 && f.k > 0.0 && std::isfinite(f.c * f.k);
        else if constexpr (std::is_same_v<F, Frechet>) return f.alpha > 0.0 && std::isfinite(f.alpha);
        else return f.gamma > 0.0 && std::isfinite(f.gamma);
      },
      m);
  if (!ok) throw Error(ErrorCode::InvalidModel, "marginal parameters must be positive and finite");
  if (!(tail_index(m) < 1.0))
    throw Error(ErrorCode::InvalidModel, "marginal tail index must be below 1");
}

/// Quantile at u in (0,1).
inline double marginal_quantile(const Marginal& m, double u) {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::InvalidInput, "u outside (0,1)");
  return std::visit(
      [u](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, HalfT>)
          return special::student_t_quantile(f.dof, (u + 1.0) / 2.0);
        else if constexpr (std::is_same_v<F, Burr>)
          return std::pow(std::pow(1.0 - u, -1.0 / f.k) - 1.0, 1.0 / f.c);
        else if constexpr (std::is_same_v<F, Frechet>)
          return std::pow(-std::log(u), -1.0 / f.alpha);
        else
          return std::pow(1.0 - u, -f.gamma);
      },
      m);
}

/// Quantile at survival probability p = 1 - u, keeping full relative
/// precision deep in the upper tail.
inline double quantile_from_survival(const Marginal& m, double p) {
  return std::visit(
      [p](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, HalfT>)
          return special::student_t_upper_quantile(f.dof, p / 2.0);
        else if constexpr (std::is_same_v<F, Burr>)
          return std::pow(std::expm1(-std::log(p) / f.k), 1.0 / f.c);
        else if constexpr (std::is_same_v<F, Frechet>)
          return std::pow(-std::log1p(-p), -1.0 / f.alpha);
        else
          return std::pow(p, -f.gamma);
      },
      m);
}

/// P(X > x).
inline double marginal_survival(const Marginal& m, double x) {
  return std::visit(
      [x](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, HalfT>)
          return x <= 0.0 ? 1.0 : 2.0 * special::student_t_survival(f.dof, x);
        else if constexpr (std::is_same_v<F, Burr>)
          return x <= 0.0 ? 1.0 : std::pow(1.0 + std::pow(x, f.c), -f.k);
        else if constexpr (std::is_same_v<F, Frechet>)
          return x <= 0.0 ? 1.0 : -std::expm1(-std::pow(x, -f.alpha));
        else
          return x <= 1.0 ? 1.0 : std::pow(x, -1.0 / f.gamma);
      },
      m);
}

inline std::string describe(const Marginal& m) {
  return std::visit(
      [](const auto& f) -> std::string {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, HalfT>) return "half_t(" + std::to_string(f.dof) + ")";
        else if constexpr (std::is_same_v<F, Burr>)
          return "burr(" + std::to_string(f.c) + "," + std::to_string(f.k) + ")";
        else if constexpr (std::is_same_v<F, Frechet>) return "frechet(" + std::to_string(f.alpha) + ")";
        else return "pareto(" + std::to_string(f.gamma) + ")";
      },
      m);
}

}  // namespace xmes
