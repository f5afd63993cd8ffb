#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"
#include "xmes/mes.hpp"
#include "xmes/model.hpp"

using namespace xmes;

TEST(MesPlain, UnivariateReducesToSystemEs) {
  const auto v = test::pareto_sample(500, 0.3, 12);
  const auto x = DataMatrix::from_column(v);
  const auto est = mes_estimate(x, 50, 0.998);
  EXPECT_EQ(est.variant, Variant::Plain);
  EXPECT_NEAR(est.theta_hat[0], est.radial_quantile / (1.0 - est.gamma_hat), 1e-12 * est.theta_hat[0]);
}

TEST(MesPlain, IdenticalComponentsSplitEvenly) {
  const auto v = test::pareto_sample(400, 0.3, 2);
  std::vector<double> data;
  for (double a : v) data.insert(data.end(), {a, a, a});
  const auto est = mes_estimate(DataMatrix(400, 3, data), 40, 0.998);
  for (double t : est.theta_hat) EXPECT_NEAR(t, est.radial_quantile / (3.0 * (1.0 - est.gamma_hat)), 1e-12 * t);
}

TEST(MesPlain, HeavyTailRejected) {
  const auto v = test::pareto_sample(1000, 1.5, 3);
  try {
    mes_estimate(DataMatrix::from_column(v), 100, 0.998);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HeavyTailUnbounded);
  }
}

TEST(MesPlain, AggregationIdentity) {
  const auto x = test::random_panel(500, 4, 21);
  const auto est = mes_estimate(x, 60, 0.999);
  const double total = std::accumulate(est.theta_hat.begin(), est.theta_hat.end(), 0.0);
  EXPECT_NEAR(total, est.radial_quantile / (1.0 - est.gamma_hat), 1e-10 * total);
}

TEST(MesPlain, ModelIiMeanNearTruth) {
  const auto spec = model_ii();
  double mean = 0.0;
  constexpr int reps = 1000;
  for (int m = 0; m < reps; ++m) mean += mes_estimate(sample_model(spec, 500, derive_seed(5, m)).data, 25, 0.998).theta_hat[0];
  mean /= reps;
  EXPECT_NEAR(mean, 10.09849, 0.15 * 10.09849);
}

TEST(MesAdjusted, ZeroBetaReducesToPlain) {
  const auto x = test::random_panel(500, 3, 4);
  const auto r = radial_decompose(x);
  const auto plain = mes_estimate(r, 70, 0.998);
  for (double rho : {-0.3, -1.0, -4.0}) {
    const auto adj = mes_estimate_adjusted(r, 70, SecondOrder{0.0, rho, 100}, 0.998);
    EXPECT_EQ(adj.variant, Variant::Adjusted);
    EXPECT_EQ(adj.theta_hat, plain.theta_hat);
  }
}

TEST(MesAdjusted, ModelVMeanNearTruth) {
  const auto spec = model_v();
  double mean = 0.0;
  constexpr int reps = 300;
  for (int m = 0; m < reps; ++m) {
    const auto x = sample_model(spec, 500, derive_seed(6, m)).data;
    mean += mes_estimate_adjusted(x, 100, default_second_order_level(500), 0.998).theta_hat[0];
  }
  mean /= reps;
  EXPECT_NEAR(mean, 6.738795, 0.15 * 6.738795);
}

TEST(CompetitorEmp, AnchorIsEmpiricalMean) {
  const auto x = test::random_panel(200, 2, 8);
  const auto r = radial_decompose(x);
  const double thr = r.threshold(20);
  double acc = 0.0;
  for (std::size_t i = 0; i < 200; ++i)
    if (r.radii[i] > thr) acc += x(i, 1);
  EXPECT_NEAR(competitor_emp(x, 1, 20, 0.9), acc / 20.0, 1e-12);
}

TEST(CompetitorEmp, Univariate) {
  const auto v = test::pareto_sample(300, 0.3, 10);
  const auto x = DataMatrix::from_column(v);
  std::vector<double> s(v);
  std::sort(s.begin(), s.end());
  const double top = std::accumulate(s.end() - 30, s.end(), 0.0) / 30.0;
  const auto r = radial_decompose(x);
  const double g = hill_estimate(r, 30);
  EXPECT_NEAR(competitor_emp(x, 0, 30, 0.998), std::pow(30.0 / (300.0 * 0.002), g) * top, 1e-9);
}

TEST(CompetitorCai, SingleExceedanceHandExample) {
  // column 0 increases with the radius; the top row has rank n
  const DataMatrix x{{1.0, 0.5}, {2.0, 0.1}, {3.0, 0.7}, {5.0, 0.2}, {9.0, 0.4}};
  const double tau = 0.99;
  const auto r = radial_decompose(x);
  const double g = hill_estimate(r, 1);
  EXPECT_NEAR(g, std::log(9.4) - std::log(5.2), 1e-15);
  const double expected = std::pow(1.0 / (5.0 * 0.01), g) * 5.0;
  EXPECT_NEAR(competitor_cai(x, 0, 1, tau), expected, 1e-12 * expected);
}

TEST(CompetitorCai, ScalesWithColumn) {
  const auto x = test::random_panel(300, 3, 13);
  const auto r = radial_decompose(x);
  const double g = hill_estimate(r, 30);
  const double base = competitor_cai(x, r, 2, 30, 0.998, g);
  std::vector<double> v(x.values().begin(), x.values().end());
  for (std::size_t i = 0; i < 300; ++i) v[i * 3 + 2] *= 3.0;
  const DataMatrix y(300, 3, v);
  // same radial exceedance set and tail index, column j scaled
  EXPECT_NEAR(competitor_cai(y, r, 2, 30, 0.998, g), 3.0 * base, 1e-12 * base);
  // whole-panel scaling leaves the radial fit unchanged as well
  EXPECT_NEAR(competitor_cai(x.scaled(3.0), 2, 30, 0.998), 3.0 * competitor_cai(x, 2, 30, 0.998), 1e-10 * base);
}

TEST(MaxRanks, TiesTakeMaximum) {
  const std::vector<double> v{3.0, 1.0, 3.0, 2.0, 3.0};
  EXPECT_EQ(max_ranks(v), (std::vector<std::size_t>{5, 1, 5, 2, 5}));
}

TEST(Variant, RoundTripNames) {
  for (auto v : {Variant::Plain, Variant::Adjusted, Variant::Emp, Variant::Cai})
    EXPECT_EQ(parse_variant(to_string(v)), v);
  for (auto k : {CiKind::Basic, CiKind::Refined}) EXPECT_EQ(parse_ci_kind(to_string(k)), k);
  EXPECT_THROW(parse_variant("median"), Error);
}
