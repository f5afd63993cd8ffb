#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "xmes/tail.hpp"

using namespace xmes;

namespace {

RadialSample radii(std::vector<double> v) { return radial_decompose(std::span<const double>(v)); }

}  // namespace

TEST(Hill, HandExample) {
  const auto r = radii({1, 2, 4, 8, 16});
  EXPECT_NEAR(hill_estimate(r, 2), 1.5 * std::numbers::ln2, 1e-15);
  EXPECT_NEAR(hill_estimate(r, 2), 1.039721, 1e-6);
}

TEST(Hill, WeightedFormEqualsMeanOfLogs) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto v = test::pareto_sample(1000, 0.4, seed);
    const auto r = radii(v);
    for (std::size_t k : {1u, 5u, 50u, 400u, 999u})
      EXPECT_NEAR(hill_estimate(r, k), test::hill_mean_of_logs(v, k), 1e-12) << "seed " << seed << " k " << k;
  }
}

TEST(Hill, ScaleInvariant) {
  std::vector<double> v;
  for (int i = 0; i < 12; ++i) v.push_back(std::pow(1.7, i));
  const double base = hill_estimate(radii(v), 5);
  for (double c : {1e-3, 0.5, 3.0, 1e6}) {
    std::vector<double> w(v);
    for (auto& x : w) x *= c;
    EXPECT_NEAR(hill_estimate(radii(w), 5), base, 1e-12);
  }
}

TEST(Hill, ParetoRecovery) {
  const auto v = test::pareto_sample(100000, 0.25, 3);
  EXPECT_NEAR(hill_estimate(radii(v), 2000), 0.25, 0.02);
}

TEST(Hill, Errors) {
  const auto r = radii({1, 2, 3});
  EXPECT_THROW(hill_estimate(r, 0), Error);
  EXPECT_THROW(hill_estimate(r, 3), Error);
  try {
    hill_estimate(radii({-1, 0, 2}), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateTail);
  }
  try {
    hill_estimate(radii({1, 2, 3}), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidK);
  }
}

TEST(Weissman, AnchorIsExact) {
  const auto v = test::pareto_sample(500, 0.3, 9);
  const auto r = radii(v);
  for (std::size_t k : {10u, 25u, 100u, 250u}) {
    const double tau = 1.0 - static_cast<double>(k) / 500.0;
    for (double g : {0.1, 0.5, 0.9}) EXPECT_EQ(weissman_quantile(r, k, tau, g), r.threshold(k));
  }
}

TEST(Weissman, HandExample) {
  const auto r = radii({1, 2, 4, 8, 16});
  const double g = 1.5 * std::numbers::ln2;
  // 4 * 0.125^(-g) = 4 exp(4.5 ln^2 2)
  const double expected = 4.0 * std::exp(4.5 * std::numbers::ln2 * std::numbers::ln2);
  EXPECT_NEAR(weissman_quantile(r, 2, 0.95, g), expected, 1e-12 * expected);
}

TEST(Weissman, MonotoneAndHomogeneous) {
  const auto v = test::pareto_sample(500, 0.3, 5);
  const auto r = radii(v);
  double prev = 0.0;
  for (double tau : {0.9, 0.95, 0.99, 0.998, 0.9999}) {
    const double q = weissman_quantile(r, 50, tau, 0.3);
    EXPECT_GT(q, prev);
    prev = q;
  }
  std::vector<double> w(v);
  for (auto& x : w) x *= 2.0;
  EXPECT_NEAR(weissman_quantile(radii(w), 50, 0.998, 0.3), 2.0 * weissman_quantile(r, 50, 0.998, 0.3), 1e-12);
}

TEST(Weissman, InvalidTau) {
  const auto r = radii({1, 2, 3, 4});
  for (double tau : {0.0, 1.0, -0.5, 1.5}) {
    try {
      weissman_quantile(r, 1, tau, 0.5);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidTau);
    }
  }
}

TEST(AngularMean, ConstantDirection) {
  std::vector<double> v;
  for (int i = 1; i <= 30; ++i) {
    v.push_back(0.3 * i * i);
    v.push_back(0.7 * i * i);
  }
  const auto r = radial_decompose(DataMatrix(30, 2, v));
  for (std::size_t k : {1u, 7u, 29u}) {
    const auto w = angular_mean(r, k);
    EXPECT_NEAR(w[0], 0.3, 1e-14);
    EXPECT_NEAR(w[1], 0.7, 1e-14);
  }
}

TEST(AngularMean, UnivariateIsOne) {
  const auto r = radii(test::pareto_sample(100, 0.5, 2));
  EXPECT_EQ(angular_mean(r, 13)[0], 1.0);
}

TEST(AngularMean, HandExample) {
  const auto r = radial_decompose(DataMatrix{{3, 1}, {0, 8}, {1, 1}});
  const auto w = angular_mean(r, 2);
  EXPECT_DOUBLE_EQ(w[0], 0.375);
  EXPECT_DOUBLE_EQ(w[1], 0.625);
}

TEST(AngularMean, TiesAtThreshold) {
  // radii (4, 4, 2): with k = 1 the threshold is 4 and nothing is strictly above it
  const auto r = radial_decompose(DataMatrix{{3, 1}, {0, 4}, {1, 1}});
  EXPECT_EQ(exceedance_count(r, 2), 2u);
  EXPECT_EQ(exceedance_count(r, 1), 0u);
  try {
    angular_mean(r, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateThreshold);
  }
  const auto w = angular_mean(r, 2);
  EXPECT_DOUBLE_EQ(w[0], 0.375);
  EXPECT_DOUBLE_EQ(w[1], 0.625);
}

TEST(AngularMean, Closure) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = radial_decompose(test::random_panel(300, 5, seed));
    const auto w = angular_mean(r, 40);
    double s = 0.0;
    for (double v : w) s += v;
    EXPECT_NEAR(s, 1.0, 1e-10);
  }
}

TEST(SecondOrder, FrechetRho) {
  // Frechet(4) radii: rho_R = -1
  double mean_rho = 0.0;
  constexpr int reps = 200;
  for (int m = 0; m < reps; ++m) {
    Engine g = make_engine(derive_seed(77, m));
    std::vector<double> v(5000);
    for (auto& x : v) x = std::pow(-std::log(open_uniform(g)), -0.25);
    const auto r = radii(v);
    mean_rho += second_order_params(r, default_second_order_level(5000)).rho / reps;
  }
  EXPECT_GE(mean_rho, -1.6);
  EXPECT_LE(mean_rho, -0.5);
}

TEST(SecondOrder, RangeAndErrors) {
  const auto r = radii(test::pareto_sample(2000, 0.3, 4));
  const auto so = second_order_params(r, default_second_order_level(2000));
  EXPECT_LE(so.rho, kRhoMax);
  EXPECT_GE(so.rho, kRhoMin);
  EXPECT_TRUE(std::isfinite(so.beta));
  EXPECT_EQ(so.s, default_second_order_level(2000));
  EXPECT_THROW(second_order_params(r, 2), Error);
  EXPECT_THROW(second_order_params(r, 2000), Error);
  std::vector<double> flat(100, 3.0);
  EXPECT_THROW(second_order_params(radii(flat), 50), Error);
}

TEST(SecondOrder, ParetoAdjustedStaysFinite) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = radii(test::pareto_sample(500, 0.25, seed));
    const auto so = second_order_params(r, default_second_order_level(500));
    const double g = adjusted_gamma(hill_estimate(r, 100), so.beta, so.rho, 500, 100);
    EXPECT_TRUE(std::isfinite(g));
    EXPECT_TRUE(std::isfinite(adjusted_quantile(r, 100, 0.998, g, so.beta, so.rho)));
  }
}

TEST(SecondOrder, DefaultLevel) {
  EXPECT_EQ(default_second_order_level(500), static_cast<std::size_t>(std::floor(std::pow(500.0, 0.97))));
  EXPECT_EQ(default_second_order_level(4), 2u);
}

TEST(AdjustedGamma, HandExamples) {
  EXPECT_DOUBLE_EQ(adjusted_gamma(0.4, 0.0, -1.0, 1000, 100), 0.4);
  EXPECT_NEAR(adjusted_gamma(0.4, 1.0, -1.0, 1000, 100), 0.38, 1e-15);
  EXPECT_NEAR(adjusted_gamma(0.4, 1.0, -1e3, 1000, 100), 0.4, 1e-15);
  EXPECT_THROW(adjusted_gamma(0.4, 1.0, 0.0, 1000, 100), Error);
}

TEST(AdjustedQuantile, HandExamples) {
  // n/k = 10, k/(n(1-tau)) = 5
  EXPECT_NEAR(quantile_correction(1000, 100, 0.98, 1.0, -1.0), 0.08, 1e-12);
  const auto r = radii(test::pareto_sample(1000, 0.3, 8));
  EXPECT_NEAR(adjusted_quantile(r, 100, 0.98, 0.3, 1.0, -1.0),
              weissman_quantile(r, 100, 0.98, 0.3) * std::exp(0.08), 1e-10);
  EXPECT_EQ(adjusted_quantile(r, 100, 0.98, 0.3, 0.0, -1.0), weissman_quantile(r, 100, 0.98, 0.3));
  EXPECT_EQ(adjusted_quantile(r, 100, 0.9, 0.3, 2.0, -0.7), r.threshold(100));
}
