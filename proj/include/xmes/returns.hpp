#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "xmes/data_matrix.hpp"
#include "xmes/error.hpp"
#include "xmes/interval.hpp"
#include "xmes/mes.hpp"
#include "xmes/output.hpp"
#include "xmes/radial.hpp"
#include "xmes/serial.hpp"
#include "xmes/tail.hpp"

namespace xmes {

struct PricePanel {
  std::vector<std::string> dates;  // ISO-8601, strictly increasing
  std::vector<std::string> names;
  DataMatrix open;                 // n x d
  DataMatrix close;                // n x d
  std::vector<double> capitalizations;

  std::size_t periods() const noexcept { return dates.size(); }
  std::size_t institutions() const noexcept { return names.size(); }
};

namespace detail {

inline bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  const int month = std::stoi(std::string(s.substr(5, 2)));
  const int day = std::stoi(std::string(s.substr(8, 2)));
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

inline std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

inline std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream f(p);
  if (!f) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  return f;
}

}  // namespace detail

inline void validate(const PricePanel& p) {
  const std::size_t n = p.periods(), d = p.institutions();
  if (n == 0 || d == 0) throw Error(ErrorCode::InvalidPrices, "empty price panel");
  if (p.open.rows() != n || p.close.rows() != n || p.open.cols() != d || p.close.cols() != d)
    throw Error(ErrorCode::InvalidPrices, "price matrices do not match dates and names");
  if (p.capitalizations.size() != d) throw Error(ErrorCode::InvalidPrices, "one capitalization per institution required");
  if (std::set<std::string>(p.names.begin(), p.names.end()).size() != d)
    throw Error(ErrorCode::InvalidPrices, "institution names must be unique");
  for (std::size_t t = 0; t < n; ++t) {
    if (!detail::is_iso_date(p.dates[t])) throw Error(ErrorCode::InvalidPrices, "bad date '" + p.dates[t] + "'");
    if (t > 0 && !(p.dates[t - 1] < p.dates[t]))
      throw Error(ErrorCode::InvalidPrices, "dates must be strictly increasing at " + p.dates[t]);
    for (std::size_t j = 0; j < d; ++j)
      if (!(p.open(t, j) > 0.0) || !(p.close(t, j) > 0.0))
        throw Error(ErrorCode::InvalidPrices, "nonpositive price for " + p.names[j] + " on " + p.dates[t]);
  }
  for (double c : p.capitalizations)
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidPrices, "capitalizations must be positive");
}

/// Reads `date,<name>_open,<name>_close,...`. Capitalizations are left empty.
inline PricePanel read_prices_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::InvalidPrices, "empty price file");
  const auto header = split_csv_line(line);
  if (header.empty() || detail::trim(header[0]) != "date" || header.size() < 3 || header.size() % 2 != 1)
    throw Error(ErrorCode::InvalidPrices, "header must be date,<name>_open,<name>_close,...");
  PricePanel p;
  for (std::size_t c = 1; c < header.size(); c += 2) {
    const std::string o = detail::trim(header[c]), cl = detail::trim(header[c + 1]);
    constexpr std::string_view so = "_open", sc = "_close";
    if (o.size() <= so.size() || o.compare(o.size() - so.size(), so.size(), so) != 0 ||
        cl.size() <= sc.size() || cl.compare(cl.size() - sc.size(), sc.size(), sc) != 0)
      throw Error(ErrorCode::InvalidPrices, "expected <name>_open,<name>_close, got " + o + "," + cl);
    const std::string name = o.substr(0, o.size() - so.size());
    if (cl.substr(0, cl.size() - sc.size()) != name)
      throw Error(ErrorCode::InvalidPrices, "open/close columns out of pairing for " + name);
    p.names.push_back(name);
  }
  const std::size_t d = p.names.size();
  std::vector<double> open, close;
  while (std::getline(is, line)) {
    if (detail::trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw Error(ErrorCode::InvalidPrices, "row with " + std::to_string(f.size()) + " fields, expected " +
                                                std::to_string(header.size()));
    p.dates.push_back(detail::trim(f[0]));
    for (std::size_t j = 0; j < d; ++j) {
      try {
        open.push_back(parse_double(detail::trim(f[1 + 2 * j])));
        close.push_back(parse_double(detail::trim(f[2 + 2 * j])));
      } catch (const Error& e) {
        throw Error(ErrorCode::InvalidPrices, e.what());
      }
    }
  }
  if (p.dates.empty()) throw Error(ErrorCode::InvalidPrices, "no price rows");
  const std::size_t n = p.dates.size();
  try {
    p.open = DataMatrix(n, d, std::move(open));
    p.close = DataMatrix(n, d, std::move(close));
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidPrices, e.what());
  }
  return p;
}

/// Reads `name,capitalization` rows (an optional header line is skipped).
inline std::map<std::string, double> read_caps_csv(std::istream& is) {
  std::map<std::string, double> caps;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (detail::trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) throw Error(ErrorCode::InvalidPrices, "capitalization rows need two fields");
    const std::string name = detail::trim(f[0]);
    const std::string value = detail::trim(f[1]);
    if (first && name == "name") { first = false; continue; }
    first = false;
    double v;
    try {
      v = parse_double(value);
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidPrices, "bad capitalization '" + value + "' for " + name);
    }
    if (!caps.emplace(name, v).second) throw Error(ErrorCode::InvalidPrices, "duplicate capitalization for " + name);
  }
  return caps;
}

inline PricePanel load_panel(const std::filesystem::path& prices, const std::filesystem::path& caps) {
  auto pf = detail::open_input(prices);
  PricePanel p = read_prices_csv(pf);
  auto cf = detail::open_input(caps);
  const auto cap_map = read_caps_csv(cf);
  for (const auto& name : p.names) {
    const auto it = cap_map.find(name);
    if (it == cap_map.end()) throw Error(ErrorCode::InvalidPrices, "no capitalization for " + name);
    p.capitalizations.push_back(it->second);
  }
  validate(p);
  return p;
}

/// phi_j = cap_j / sum(cap)
inline std::vector<double> size_weights(std::span<const double> caps) {
  double total = 0.0;
  for (double c : caps) {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidPrices, "capitalizations must be positive");
    total += c;
  }
  std::vector<double> w;
  for (double c : caps) w.push_back(c / total);
  return w;
}

enum class ReturnMode {
  OpenClose,      // 1 - close_t / open_t
  PreviousClose,  // 1 - close_t / close_{t-1}; one row shorter
};

/// Weighted negative returns X_tj = phi_j (1 - ratio_tj).
inline DataMatrix compute_returns(const PricePanel& p, ReturnMode mode = ReturnMode::OpenClose) {
  validate(p);
  const auto phi = size_weights(p.capitalizations);
  const std::size_t d = p.institutions();
  const std::size_t first = mode == ReturnMode::OpenClose ? 0 : 1;
  if (p.periods() <= first) throw Error(ErrorCode::InvalidPrices, "need at least two periods for previous-close returns");
  std::vector<double> v;
  v.reserve((p.periods() - first) * d);
  for (std::size_t t = first; t < p.periods(); ++t)
    for (std::size_t j = 0; j < d; ++j) {
      const double ref = mode == ReturnMode::OpenClose ? p.open(t, j) : p.close(t - 1, j);
      v.push_back(phi[j] * (1.0 - p.close(t, j) / ref));
    }
  return DataMatrix(p.periods() - first, d, std::move(v));
}

/// tau = 1 - 1/(frequency * years)
inline double return_period_tau(double frequency_per_year, double years) {
  if (!(frequency_per_year > 0.0) || !(years > 0.0))
    throw Error(ErrorCode::InvalidHorizon, "frequency and horizon must be positive");
  const double periods = frequency_per_year * years;
  if (!(periods > 1.0)) throw Error(ErrorCode::InvalidHorizon, "return period must exceed one observation");
  return 1.0 - 1.0 / periods;
}

struct ReportOptions {
  Variant variant = Variant::Adjusted;
  CiKind ci_kind = CiKind::Refined;
  double alpha = 0.05;
  std::size_t serial_lags = 0;
  std::optional<std::size_t> second_order_level;
  std::vector<std::string> names;    // defaults to "1".."d"
  double total_capitalization = 1.0; // converts weighted MES to currency
};

struct InstitutionRow {
  std::string name;
  double size_share = 0.0;
  double mes = 0.0;           // theta_j on the weighted-return scale
  double mes_share = 0.0;
  double es_currency = 0.0;   // theta_j * total capitalization
  double capital_loss = 0.0;  // theta_j / phi_j
  double mes_lower = 0.0;
  double mes_upper = 0.0;
  double capital_loss_lower = 0.0;
  double capital_loss_upper = 0.0;
  std::size_t rank_size = 0;
  std::size_t rank_mes = 0;
  std::size_t rank_capital_loss = 0;
  double cumulative_mes_share = 0.0;  // share of this and every higher-ranked institution
};

struct RiskReport {
  std::size_t n = 0;
  std::size_t k = 0;
  double tau = 0.0;
  Variant variant = Variant::Adjusted;
  CiKind ci_kind = CiKind::Refined;
  double alpha = 0.05;
  double gamma_hat = 0.0;
  double radial_quantile = 0.0;
  double system_es = 0.0;
  double inflation = 1.0;
  std::size_t serial_lags = 0;
  std::size_t exceedances = 0;
  std::vector<InstitutionRow> rows;  // input order
};

/// Ranks 1..d by decreasing value; ties keep input order.
inline std::vector<std::size_t> descending_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  std::vector<std::size_t> rank(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) rank[idx[i]] = i + 1;
  return rank;
}

inline RiskReport build_report(const DataMatrix& x, std::span<const double> weights, std::size_t k, double tau,
                               const ReportOptions& opt = {}) {
  const std::size_t d = x.cols();
  if (weights.size() != d) throw Error(ErrorCode::InvalidInput, "one weight per column required");
  if (!opt.names.empty() && opt.names.size() != d) throw Error(ErrorCode::InvalidInput, "one name per column required");
  if (opt.variant != Variant::Plain && opt.variant != Variant::Adjusted)
    throw Error(ErrorCode::InvalidInput, "report supports the plain and adjusted estimators");
  const RadialSample r = radial_decompose(x);
  const TailFit fit = fit_tail(r, k, opt.second_order_level.value_or(default_second_order_level(r)));
  const MesEstimate est = opt.variant == Variant::Adjusted ? mes_estimate_adjusted(r, k, *fit.second_order, tau)
                                                           : mes_estimate(r, k, tau);
  double inflation = 1.0;
  if (opt.serial_lags > 0) inflation = variance_inflation(r, k, opt.serial_lags).inflation;
  const auto ci = confidence_interval(est, fit, opt.ci_kind, opt.alpha, inflation);

  RiskReport rep;
  rep.n = x.rows();
  rep.k = k;
  rep.tau = tau;
  rep.variant = opt.variant;
  rep.ci_kind = opt.ci_kind;
  rep.alpha = opt.alpha;
  rep.gamma_hat = est.gamma_hat;
  rep.radial_quantile = est.radial_quantile;
  rep.inflation = inflation;
  rep.serial_lags = opt.serial_lags;
  rep.exceedances = est.exceedances;
  const double total = std::accumulate(est.theta_hat.begin(), est.theta_hat.end(), 0.0);
  rep.system_es = total;

  std::vector<double> loss(d);
  for (std::size_t j = 0; j < d; ++j) loss[j] = est.theta_hat[j] / weights[j];
  const auto rs = descending_ranks(weights);
  const auto rm = descending_ranks(est.theta_hat);
  const auto rl = descending_ranks(loss);

  rep.rows.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    auto& row = rep.rows[j];
    row.name = opt.names.empty() ? std::to_string(j + 1) : opt.names[j];
    row.size_share = weights[j];
    row.mes = est.theta_hat[j];
    row.mes_share = est.theta_hat[j] / total;
    row.es_currency = est.theta_hat[j] * opt.total_capitalization;
    row.capital_loss = loss[j];
    row.mes_lower = ci[j].lower;
    row.mes_upper = ci[j].upper;
    row.capital_loss_lower = ci[j].lower / weights[j];
    row.capital_loss_upper = ci[j].upper / weights[j];
    row.rank_size = rs[j];
    row.rank_mes = rm[j];
    row.rank_capital_loss = rl[j];
  }
  std::vector<std::size_t> by_mes(d);
  for (std::size_t j = 0; j < d; ++j) by_mes[rm[j] - 1] = j;
  double cum = 0.0;
  for (std::size_t j : by_mes) {
    cum += rep.rows[j].mes_share;
    rep.rows[j].cumulative_mes_share = cum;
  }
  return rep;
}

inline RiskReport build_report(const PricePanel& p, std::size_t k, double tau, ReportOptions opt = {},
                               ReturnMode mode = ReturnMode::OpenClose) {
  const DataMatrix x = compute_returns(p, mode);
  opt.names = p.names;
  opt.total_capitalization = std::accumulate(p.capitalizations.begin(), p.capitalizations.end(), 0.0);
  return build_report(x, size_weights(p.capitalizations), k, tau, opt);
}

inline void write_report_csv(std::ostream& os, const RiskReport& rep) {
  os << "name,size_share,mes,mes_share,es_currency,capital_loss,mes_lower,mes_upper,capital_loss_lower,"
        "capital_loss_upper,rank_size,rank_mes,rank_capital_loss,cumulative_mes_share\n";
  for (const auto& r : rep.rows)
    os << r.name << ',' << format_double(r.size_share) << ',' << format_double(r.mes) << ','
       << format_double(r.mes_share) << ',' << format_double(r.es_currency) << ',' << format_double(r.capital_loss)
       << ',' << format_double(r.mes_lower) << ',' << format_double(r.mes_upper) << ','
       << format_double(r.capital_loss_lower) << ',' << format_double(r.capital_loss_upper) << ',' << r.rank_size
       << ',' << r.rank_mes << ',' << r.rank_capital_loss << ',' << format_double(r.cumulative_mes_share) << '\n';
}

/// Summary of the fit behind a report as key,value rows.
inline void write_report_summary_csv(std::ostream& os, const RiskReport& rep) {
  os << "key,value\n"
     << "n," << rep.n << '\n'
     << "k," << rep.k << '\n'
     << "tau," << format_double(rep.tau) << '\n'
     << "variant," << to_string(rep.variant) << '\n'
     << "ci_kind," << to_string(rep.ci_kind) << '\n'
     << "alpha," << format_double(rep.alpha) << '\n'
     << "gamma_hat," << format_double(rep.gamma_hat) << '\n'
     << "radial_quantile," << format_double(rep.radial_quantile) << '\n'
     << "system_es," << format_double(rep.system_es) << '\n'
     << "serial_lags," << rep.serial_lags << '\n'
     << "inflation," << format_double(rep.inflation) << '\n'
     << "exceedances," << rep.exceedances << '\n';
}

struct StabilityPoint {
  std::string series;  // "radial" or an institution name
  std::size_t k = 0;
  double gamma_hat = 0.0;  // NaN where the Hill fit is undefined
};

/// Hill estimates of the radius and of every column over k/n = 1%..max_percent%.
inline std::vector<StabilityPoint> gamma_stability(const DataMatrix& x, std::span<const std::string> names = {},
                                                   int max_percent = 15) {
  const std::size_t n = x.rows();
  std::vector<std::size_t> grid;
  for (int p = 1; p <= max_percent; ++p) {
    const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(n) * p / 100.0));
    if (k >= 1 && k < n && (grid.empty() || grid.back() != k)) grid.push_back(k);
  }
  auto trace = [&](const std::string& series, const RadialSample& r, std::vector<StabilityPoint>& out) {
    for (std::size_t k : grid) {
      double g = std::numeric_limits<double>::quiet_NaN();
      try {
        g = hill_estimate(r, k);
      } catch (const Error&) {
      }
      out.push_back({series, k, g});
    }
  };
  std::vector<StabilityPoint> out;
  trace("radial", radial_decompose(x), out);
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const auto col = x.column(j);
    trace(names.empty() ? std::to_string(j + 1) : names[j], radial_decompose(std::span<const double>(col)), out);
  }
  return out;
}

inline void write_stability_csv(std::ostream& os, std::span<const StabilityPoint> pts, std::size_t n) {
  os << "series,k,k_over_n,gamma_hat\n";
  for (const auto& p : pts)
    os << p.series << ',' << p.k << ',' << format_double(static_cast<double>(p.k) / static_cast<double>(n)) << ','
       << format_double(p.gamma_hat) << '\n';
}

inline void write_stability_svg(std::ostream& os, std::span<const StabilityPoint> pts, std::size_t n) {
  SvgPanel panel{"Tail index estimates", "k/n", {}, {}};
  for (const auto& p : pts) {
    if (panel.series.empty() || panel.series.back().name != p.series) panel.series.push_back({p.series, {}, {}});
    panel.series.back().x.push_back(static_cast<double>(p.k) / static_cast<double>(n));
    panel.series.back().y.push_back(p.gamma_hat);
  }
  write_svg(os, {panel}, 1, 640, 400);
}

}  // namespace xmes
