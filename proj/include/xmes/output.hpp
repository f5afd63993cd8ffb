#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xmes/data_matrix.hpp"
#include "xmes/error.hpp"
#include "xmes/experiment.hpp"

namespace xmes {

/// Shortest-safe lossless decimal form of a double (17 significant digits).
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view s) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw Error(ErrorCode::InvalidInput, "not a number: '" + tmp + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

inline constexpr std::string_view kCurveCsvHeader = "model,estimator_or_ci,k,k_over_n,metric,value,failures";

/// "plain@1", "ci_refined_adjusted@2": series name plus 1-based component.
inline std::string curve_label(const EstimatorCurve& c) {
  return std::string(to_string(c.estimator)) + "@" + std::to_string(c.component + 1);
}
inline std::string curve_label(const CoverageCurve& c) {
  return label(c.interval) + "@" + std::to_string(c.component + 1);
}

inline void write_curves_csv(std::ostream& os, const CurveResult& res) {
  os << kCurveCsvHeader << '\n';
  auto row = [&](const std::string& lbl, std::size_t k, std::string_view metric, double value,
                 std::size_t failures) {
    os << res.model << ',' << lbl << ',' << k << ','
       << format_double(static_cast<double>(k) / static_cast<double>(res.n)) << ',' << metric << ','
       << format_double(value) << ',' << failures << '\n';
  };
  for (const auto& c : res.estimators) {
    const std::string lbl = curve_label(c);
    for (const auto& p : c.points) {
      row(lbl, p.k, "squared_bias", p.squared_bias, p.failures);
      row(lbl, p.k, "variance", p.variance, p.failures);
      row(lbl, p.k, "mse", p.mse, p.failures);
      row(lbl, p.k, "used", static_cast<double>(p.used), p.failures);
    }
  }
  for (const auto& c : res.coverage) {
    const std::string lbl = curve_label(c);
    for (const auto& p : c.points) {
      row(lbl, p.k, "non_coverage", p.non_coverage, p.failures);
      row(lbl, p.k, "used", static_cast<double>(p.used), p.failures);
    }
  }
}

namespace detail {

inline IntervalSpec parse_interval_label(std::string_view s) {
  // ci_<kind>_<base>[_serial<L>]
  const auto parts = [&] {
    std::vector<std::string> v;
    std::size_t start = 0;
    while (true) {
      const auto pos = s.find('_', start);
      v.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return v;
  }();
  if (parts.size() < 3 || parts.size() > 4 || parts[0] != "ci")
    throw Error(ErrorCode::InvalidInput, "bad interval label '" + std::string(s) + "'");
  IntervalSpec spec{parse_ci_kind(parts[1]), parse_variant(parts[2]), 0};
  if (parts.size() == 4) {
    if (parts[3].rfind("serial", 0) != 0)
      throw Error(ErrorCode::InvalidInput, "bad interval label '" + std::string(s) + "'");
    spec.serial_lags = std::stoul(parts[3].substr(6));
  }
  return spec;
}

}  // namespace detail

/// Inverse of write_curves_csv. n is recovered from k / k_over_n; replicates,
/// tau and alpha are not part of the table and stay at their defaults.
inline CurveResult read_curves_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || split_csv_line(line) != split_csv_line(kCurveCsvHeader))
    throw Error(ErrorCode::InvalidInput, "missing curve CSV header");
  CurveResult res;
  std::map<std::string, std::size_t> est_index, cov_index;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw Error(ErrorCode::InvalidInput, "line " + std::to_string(lineno) + ": expected 7 fields");
    res.model = f[0];
    const std::string& lbl = f[1];
    const std::size_t k = std::stoul(f[2]);
    const double frac = parse_double(f[3]);
    if (res.n == 0 && frac > 0.0) res.n = static_cast<std::size_t>(std::llround(static_cast<double>(k) / frac));
    const std::string& metric = f[4];
    const double value = parse_double(f[5]);
    const std::size_t failures = std::stoul(f[6]);
    if (std::find(res.k_grid.begin(), res.k_grid.end(), k) == res.k_grid.end()) res.k_grid.push_back(k);

    const auto at = lbl.rfind('@');
    if (at == std::string::npos) throw Error(ErrorCode::InvalidInput, "label without component: " + lbl);
    const std::size_t comp = std::stoul(lbl.substr(at + 1)) - 1;
    const std::string series = lbl.substr(0, at);

    if (series.rfind("ci_", 0) == 0) {
      auto [it, fresh] = cov_index.try_emplace(lbl, res.coverage.size());
      if (fresh) res.coverage.push_back({detail::parse_interval_label(series), comp, {}});
      auto& pts = res.coverage[it->second].points;
      if (pts.empty() || pts.back().k != k) pts.push_back({k, 0.0, 0, failures});
      if (metric == "non_coverage") pts.back().non_coverage = value;
      else if (metric == "used") pts.back().used = static_cast<std::size_t>(value);
      else throw Error(ErrorCode::InvalidInput, "unknown metric " + metric);
    } else {
      auto [it, fresh] = est_index.try_emplace(lbl, res.estimators.size());
      if (fresh) res.estimators.push_back({parse_variant(series), comp, {}});
      auto& pts = res.estimators[it->second].points;
      if (pts.empty() || pts.back().k != k) pts.push_back({k, 0.0, 0.0, 0.0, 0, failures});
      if (metric == "squared_bias") pts.back().squared_bias = value;
      else if (metric == "variance") pts.back().variance = value;
      else if (metric == "mse") pts.back().mse = value;
      else if (metric == "used") pts.back().used = static_cast<std::size_t>(value);
      else throw Error(ErrorCode::InvalidInput, "unknown metric " + metric);
    }
  }
  std::sort(res.k_grid.begin(), res.k_grid.end());
  return res;
}

/// Numeric matrix CSV; a first row that does not parse as numbers is taken
/// as a header and returned through `header`.
inline DataMatrix read_matrix_csv(std::istream& is, std::vector<std::string>* header = nullptr) {
  std::string line;
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    std::vector<double> row;
    try {
      for (const auto& s : f) row.push_back(parse_double(s));
    } catch (const Error&) {
      if (rows == 0 && cols == 0) {
        if (header) *header = f;
        cols = f.size();
        continue;
      }
      throw Error(ErrorCode::InvalidInput, "line " + std::to_string(lineno) + ": non-numeric field");
    }
    if (cols == 0) cols = row.size();
    if (row.size() != cols) throw Error(ErrorCode::InvalidInput, "line " + std::to_string(lineno) + ": ragged row");
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::InvalidInput, "no data rows");
  return DataMatrix(rows, cols, std::move(values));
}

inline void write_matrix_csv(std::ostream& os, const DataMatrix& x, const std::vector<std::string>& header = {}) {
  for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
  if (!header.empty()) os << '\n';
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) os << (j ? "," : "") << format_double(x(i, j));
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// SVG

struct SvgSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgPanel {
  std::string title;
  std::string x_label;
  std::vector<SvgSeries> series;
  std::optional<double> reference;  // horizontal dashed rule
};

namespace detail {

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                           "#9467bd", "#8c564b", "#e377c2", "#17becf"};

inline std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string tick_precise(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline void draw_panel(std::ostream& os, const SvgPanel& p, double ox, double oy, double w, double h) {
  constexpr double ml = 60, mr = 10, mt = 24, mb = 40;
  const double pw = w - ml - mr, ph = h - mt - mb;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : p.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (p.reference) {
    ymin = std::min(ymin, *p.reference);
    ymax = std::max(ymax, *p.reference);
  }
  if (!std::isfinite(xmin)) { xmin = 0; xmax = 1; }
  if (!std::isfinite(ymin)) { ymin = 0; ymax = 1; }
  if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
  if (ymax == ymin) { ymin -= 0.5; ymax += 0.5; }
  ymin = std::min(ymin, 0.0);
  ymax += 0.05 * (ymax - ymin);

  auto px = [&](double x) { return ox + ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return oy + mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  os << "<g>\n";
  os << "<text x=\"" << ox + ml + pw / 2 << "\" y=\"" << oy + 16
     << "\" text-anchor=\"middle\" font-size=\"13\">" << escape_xml(p.title) << "</text>\n";
  os << "<rect x=\"" << ox + ml << "\" y=\"" << oy + mt << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    os << "<text x=\"" << ox + ml - 4 << "\" y=\"" << py(yv) + 4
       << "\" text-anchor=\"end\" font-size=\"10\">" << tick(yv) << "</text>\n";
    os << "<text x=\"" << px(xv) << "\" y=\"" << oy + mt + ph + 14
       << "\" text-anchor=\"middle\" font-size=\"10\">" << tick(xv) << "</text>\n";
  }
  os << "<text x=\"" << ox + ml + pw / 2 << "\" y=\"" << oy + h - 8
     << "\" text-anchor=\"middle\" font-size=\"11\">" << escape_xml(p.x_label) << "</text>\n";
  if (p.reference)
    os << "<line x1=\"" << px(xmin) << "\" x2=\"" << px(xmax) << "\" y1=\"" << py(*p.reference)
       << "\" y2=\"" << py(*p.reference) << "\" stroke=\"#000\" stroke-dasharray=\"5,4\"/>\n";
  for (std::size_t s = 0; s < p.series.size(); ++s) {
    const auto& ser = p.series[s];
    const char* colour = kPalette[s % std::size(kPalette)];
    std::string path;
    bool pen = false;
    for (std::size_t i = 0; i < ser.x.size(); ++i) {
      if (!std::isfinite(ser.y[i])) { pen = false; continue; }
      path += (pen ? " L" : " M") + tick_precise(px(ser.x[i])) + "," + tick_precise(py(ser.y[i]));
      pen = true;
    }
    if (!path.empty())
      os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n";
    const double ly = oy + mt + 12 + 13.0 * static_cast<double>(s);
    os << "<line x1=\"" << ox + ml + pw - 120 << "\" x2=\"" << ox + ml + pw - 100 << "\" y1=\"" << ly - 4
       << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << ox + ml + pw - 96 << "\" y=\"" << ly << "\" font-size=\"10\">"
       << escape_xml(ser.name) << "</text>\n";
  }
  os << "</g>\n";
}

}  // namespace detail

/// Panels laid out on a grid with `columns` panels per row.
inline void write_svg(std::ostream& os, const std::vector<SvgPanel>& panels, std::size_t columns = 2,
                      double panel_w = 420, double panel_h = 300) {
  const std::size_t rows = (panels.size() + columns - 1) / std::max<std::size_t>(columns, 1);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << panel_w * static_cast<double>(columns)
     << "\" height=\"" << panel_h * static_cast<double>(rows) << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i)
    detail::draw_panel(os, panels[i], panel_w * static_cast<double>(i % columns),
                       panel_h * static_cast<double>(i / columns), panel_w, panel_h);
  os << "</svg>\n";
}

/// Squared bias, variance, MSE and non-coverage against k/n for one component.
inline std::vector<SvgPanel> curve_panels(const CurveResult& res, std::size_t component) {
  std::vector<SvgPanel> panels{{"Squared bias", "k/n", {}, {}},
                               {"Variance", "k/n", {}, {}},
                               {"MSE", "k/n", {}, {}},
                               {"Non-coverage", "k/n", {}, res.alpha}};
  const double n = static_cast<double>(res.n);
  for (const auto& c : res.estimators) {
    if (c.component != component) continue;
    SvgSeries b{std::string(to_string(c.estimator)), {}, {}}, v = b, m = b;
    for (const auto& p : c.points) {
      const double x = static_cast<double>(p.k) / n;
      b.x.push_back(x); b.y.push_back(p.squared_bias);
      v.x.push_back(x); v.y.push_back(p.variance);
      m.x.push_back(x); m.y.push_back(p.mse);
    }
    panels[0].series.push_back(std::move(b));
    panels[1].series.push_back(std::move(v));
    panels[2].series.push_back(std::move(m));
  }
  for (const auto& c : res.coverage) {
    if (c.component != component) continue;
    SvgSeries s{label(c.interval).substr(3), {}, {}};
    for (const auto& p : c.points) {
      s.x.push_back(static_cast<double>(p.k) / n);
      s.y.push_back(p.non_coverage);
    }
    panels[3].series.push_back(std::move(s));
  }
  return panels;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  return f;
}

inline void create_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error(ErrorCode::IoError, "cannot create directory " + dir.string());
}

}  // namespace detail

/// Writes <model>_curves.csv and one <model>_component<j>.svg per component
/// present in the result. Returns the written paths.
inline std::vector<std::filesystem::path> emit_outputs(const CurveResult& res,
                                                       const std::filesystem::path& dir) {
  detail::create_dir(dir);
  const std::string stem = res.model.empty() ? std::string("experiment") : res.model;
  std::vector<std::filesystem::path> written;

  const auto csv = dir / (stem + "_curves.csv");
  {
    auto f = detail::open_output(csv);
    write_curves_csv(f, res);
    if (!f) throw Error(ErrorCode::IoError, "write failed: " + csv.string());
  }
  written.push_back(csv);

  std::vector<std::size_t> comps;
  for (const auto& c : res.estimators) comps.push_back(c.component);
  for (const auto& c : res.coverage) comps.push_back(c.component);
  std::sort(comps.begin(), comps.end());
  comps.erase(std::unique(comps.begin(), comps.end()), comps.end());
  for (std::size_t j : comps) {
    const auto svg = dir / (stem + "_component" + std::to_string(j + 1) + ".svg");
    auto f = detail::open_output(svg);
    write_svg(f, curve_panels(res, j));
    if (!f) throw Error(ErrorCode::IoError, "write failed: " + svg.string());
    written.push_back(svg);
  }
  return written;
}

}  // namespace xmes
