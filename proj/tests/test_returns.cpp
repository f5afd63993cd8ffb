#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <set>
#include <sstream>

#include "panel.hpp"
#include "support.hpp"
#include "xmes/returns.hpp"

using namespace xmes;
namespace fs = std::filesystem;

namespace {

PricePanel tiny_panel(std::vector<double> open, std::vector<double> close, std::vector<double> caps) {
  const std::size_t d = caps.size(), n = open.size() / d;
  PricePanel p;
  for (std::size_t t = 0; t < n; ++t) p.dates.push_back("2020-01-0" + std::to_string(t + 1));
  for (std::size_t j = 0; j < d; ++j) p.names.push_back("b" + std::to_string(j));
  p.open = DataMatrix(n, d, open);
  p.close = DataMatrix(n, d, close);
  p.capitalizations = caps;
  return p;
}

void expect_rows_near(const InstitutionRow& a, const InstitutionRow& b, double tol) {
  EXPECT_EQ(a.name, b.name);
  EXPECT_NEAR(a.size_share, b.size_share, tol);
  EXPECT_NEAR(a.mes, b.mes, tol * std::abs(a.mes));
  EXPECT_NEAR(a.mes_share, b.mes_share, tol);
  EXPECT_NEAR(a.capital_loss, b.capital_loss, tol * std::abs(a.capital_loss));
  EXPECT_NEAR(a.mes_lower, b.mes_lower, tol * std::abs(a.mes_lower));
  EXPECT_NEAR(a.mes_upper, b.mes_upper, tol * std::abs(a.mes_upper));
  EXPECT_EQ(a.rank_size, b.rank_size);
  EXPECT_EQ(a.rank_mes, b.rank_mes);
  EXPECT_EQ(a.rank_capital_loss, b.rank_capital_loss);
}

}  // namespace

TEST(Returns, ConstantPricesGiveZero) {
  const auto x = compute_returns(tiny_panel({10, 20, 10, 20}, {10, 20, 10, 20}, {1, 1}));
  for (double v : x.values()) EXPECT_EQ(v, 0.0);
}

TEST(Returns, SingleDrop) {
  const auto x = compute_returns(tiny_panel({100}, {90}, {5}));
  EXPECT_NEAR(x(0, 0), 0.10, 1e-15);
}

TEST(Returns, PreviousCloseMode) {
  const auto x = compute_returns(tiny_panel({100, 95}, {100, 80}, {1}), ReturnMode::PreviousClose);
  ASSERT_EQ(x.rows(), 1u);
  EXPECT_NEAR(x(0, 0), 0.2, 1e-15);
}

TEST(Returns, Weights) {
  const std::vector<double> caps{3.0, 1.0};
  EXPECT_EQ(size_weights(caps), (std::vector<double>{0.75, 0.25}));
  const auto x = compute_returns(tiny_panel({100, 100}, {90, 90}, {3, 1}));
  EXPECT_NEAR(x(0, 0), 0.075, 1e-15);
  EXPECT_NEAR(x(0, 1), 0.025, 1e-15);
}

TEST(Returns, InvalidPrices) {
  auto p = tiny_panel({100, -1}, {90, 90}, {1, 1});
  try {
    compute_returns(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidPrices);
  }
  p = tiny_panel({100, 100, 100, 100}, {90, 90, 90, 90}, {1, 1});
  p.dates = {"2020-01-02", "2020-01-01"};
  EXPECT_THROW(compute_returns(p), Error);
  p.dates = {"2020-01-01", "2020/01/02"};
  EXPECT_THROW(compute_returns(p), Error);
  p = tiny_panel({100, 100}, {90, 90}, {1, 1});
  p.names = {"x", "x"};
  EXPECT_THROW(compute_returns(p), Error);
}

TEST(Returns, ReturnPeriodTau) {
  EXPECT_NEAR(return_period_tau(52, 10), 1.0 - 1.0 / 520.0, 1e-16);
  EXPECT_NEAR(return_period_tau(52, 10), 0.998077, 1e-6);
  EXPECT_NEAR(return_period_tau(52, 20), 0.999038, 1e-6);
  for (auto [f, y] : {std::pair{1.0, 1.0}, std::pair{0.5, 1.0}, std::pair{52.0, 0.0}, std::pair{-52.0, 10.0}}) {
    try {
      return_period_tau(f, y);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidHorizon);
    }
  }
}

TEST(Report, SingleInstitution) {
  const auto v = test::pareto_sample(400, 0.3, 4);
  const std::vector<double> w{1.0};
  const auto rep = build_report(DataMatrix::from_column(v), w, 40, 0.998);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].rank_size, 1u);
  EXPECT_EQ(rep.rows[0].rank_mes, 1u);
  EXPECT_EQ(rep.rows[0].rank_capital_loss, 1u);
  EXPECT_EQ(rep.rows[0].mes_share, 1.0);
  EXPECT_EQ(rep.rows[0].cumulative_mes_share, 1.0);
}

TEST(Report, SharesCloseAndRanksPermute) {
  const auto p = test::synthetic_panel();
  const auto rep = build_report(p, 26, return_period_tau(52, 10));
  double size = 0.0, mes = 0.0;
  std::set<std::size_t> a, b, c;
  for (const auto& r : rep.rows) {
    size += r.size_share;
    mes += r.mes_share;
    a.insert(r.rank_size);
    b.insert(r.rank_mes);
    c.insert(r.rank_capital_loss);
    EXPECT_LE(r.mes_lower, r.mes_upper);
  }
  EXPECT_NEAR(size, 1.0, 1e-9);
  EXPECT_NEAR(mes, 1.0, 1e-9);
  const std::set<std::size_t> all{1, 2, 3, 4, 5};
  EXPECT_EQ(a, all);
  EXPECT_EQ(b, all);
  EXPECT_EQ(c, all);
  double top = 0.0;
  for (const auto& r : rep.rows) top = std::max(top, r.cumulative_mes_share);
  EXPECT_NEAR(top, 1.0, 1e-9);
  EXPECT_NEAR(rep.system_es * std::accumulate(p.capitalizations.begin(), p.capitalizations.end(), 0.0),
              std::accumulate(rep.rows.begin(), rep.rows.end(), 0.0,
                              [](double s, const InstitutionRow& r) { return s + r.es_currency; }),
              1e-9);
}

TEST(Report, WeightEquivariance) {
  auto p = test::synthetic_panel(300, 5);
  const auto base = build_report(p, 30, 0.998);
  for (double c : {0.001, 7.0, 1e6}) {
    auto q = p;
    for (auto& cap : q.capitalizations) cap *= c;
    const auto rep = build_report(q, 30, 0.998);
    for (std::size_t j = 0; j < 5; ++j) expect_rows_near(base.rows[j], rep.rows[j], 1e-12);
  }
}

TEST(Report, PermutationEquivariance) {
  const auto p = test::synthetic_panel(300, 6);
  const auto base = build_report(p, 30, 0.998);
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  PricePanel q = p;
  q.open = p.open.permuted_columns(perm);
  q.close = p.close.permuted_columns(perm);
  for (std::size_t j = 0; j < 5; ++j) {
    q.names[j] = p.names[perm[j]];
    q.capitalizations[j] = p.capitalizations[perm[j]];
  }
  const auto rep = build_report(q, 30, 0.998);
  for (std::size_t j = 0; j < 5; ++j) {
    const auto& a = base.rows[perm[j]];
    const auto& b = rep.rows[j];
    EXPECT_EQ(a.name, b.name);
    EXPECT_NEAR(a.mes, b.mes, 1e-10 * a.mes);
    EXPECT_NEAR(a.mes_share, b.mes_share, 1e-10);
    EXPECT_EQ(a.rank_size, b.rank_size);
    EXPECT_EQ(a.rank_mes, b.rank_mes);
    EXPECT_EQ(a.rank_capital_loss, b.rank_capital_loss);
  }
}

TEST(Report, ExchangeableEqualShares) {
  const ModelSpec spec{"exch", Gumbel{1.5}, std::vector<Marginal>(4, Pareto{0.3})};
  const auto x = sample_model(spec, 5000, 3).data;
  const std::vector<double> w(4, 0.25);
  const auto rep = build_report(x, w, 250, 0.9995);
  for (const auto& r : rep.rows) EXPECT_NEAR(r.mes_share, 0.25, 0.04);
  const auto perm = build_report(x.permuted_columns(std::vector<std::size_t>{2, 3, 0, 1}), w, 250, 0.9995);
  EXPECT_NEAR(perm.rows[0].mes, rep.rows[2].mes, 1e-10 * rep.rows[2].mes);
}

TEST(Report, SerialInflationWidens) {
  const auto p = test::synthetic_panel(520, 8);
  const auto plain = build_report(p, 40, 0.998);
  ReportOptions opt;
  opt.serial_lags = 10;
  const auto infl = build_report(p, 40, 0.998, opt);
  EXPECT_GE(infl.inflation, 1.0);
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_EQ(plain.rows[j].mes, infl.rows[j].mes);
    EXPECT_LE(infl.rows[j].mes_lower, plain.rows[j].mes_lower);
    EXPECT_GE(infl.rows[j].mes_upper, plain.rows[j].mes_upper);
  }
}

TEST(Report, CsvIngestion) {
  const auto p = test::synthetic_panel(60, 9);
  const auto dir = fs::temp_directory_path() / "xmes_test_ingest";
  fs::create_directories(dir);
  test::write_panel(p, dir / "prices.csv", dir / "caps.csv");
  const auto q = load_panel(dir / "prices.csv", dir / "caps.csv");
  EXPECT_EQ(q.dates, p.dates);
  EXPECT_EQ(q.names, p.names);
  EXPECT_TRUE(q.open == p.open);
  EXPECT_TRUE(q.close == p.close);
  EXPECT_EQ(q.capitalizations, p.capitalizations);

  std::istringstream bad_header("date,a_open,b_close\n2020-01-01,1,2\n");
  EXPECT_THROW(read_prices_csv(bad_header), Error);
  std::istringstream missing("name,capitalization\nalpha,3\n");
  const auto caps = read_caps_csv(missing);
  EXPECT_EQ(caps.size(), 1u);
  EXPECT_THROW(load_panel(dir / "nope.csv", dir / "caps.csv"), Error);
}

TEST(Report, GoldenPanel) {
  const auto p = test::synthetic_panel();
  ReportOptions opt;
  opt.serial_lags = 5;
  const auto rep = build_report(p, 26, return_period_tau(52, 10), opt);
  std::ostringstream os;
  write_report_csv(os, rep);
  write_report_summary_csv(os, rep);
  const fs::path golden = fs::path(XMES_TEST_DATA) / "golden_bank_report.csv";
  if (std::getenv("XMES_UPDATE_GOLDEN")) {
    std::ofstream(golden) << os.str();
    GTEST_SKIP() << "golden file rewritten";
  }
  std::ifstream f(golden);
  ASSERT_TRUE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(os.str(), ss.str());
}

TEST(Stability, TraceShape) {
  const auto p = test::synthetic_panel(500, 10);
  const auto x = compute_returns(p);
  const auto trace = gamma_stability(x, p.names);
  EXPECT_EQ(trace.size(), 6u * 15u);
  EXPECT_EQ(trace.front().series, "radial");
  EXPECT_EQ(trace.back().series, "epsilon");
  std::ostringstream csv, svg;
  write_stability_csv(csv, trace, x.rows());
  write_stability_svg(svg, trace, x.rows());
  EXPECT_EQ(csv.str().substr(0, 28), "series,k,k_over_n,gamma_hat\n");
  EXPECT_NE(svg.str().find("</svg>"), std::string::npos);
}
