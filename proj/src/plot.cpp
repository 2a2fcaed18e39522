#include "waypoint_ar/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "waypoint_ar/errors.hpp"

namespace wpar {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 56.0;
constexpr const char* kGroundTruthColor = "#f28e2b";  // orange
constexpr const char* kPredictionColor = "#2ca02c";   // green
constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#9467bd",
                                                 "#8c564b", "#17becf", "#7f7f7f"};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Bounds {
  double lo_x = std::numeric_limits<double>::infinity();
  double hi_x = -std::numeric_limits<double>::infinity();
  double lo_y = std::numeric_limits<double>::infinity();
  double hi_y = -std::numeric_limits<double>::infinity();

  void Add(double x, double y) {
    lo_x = std::min(lo_x, x);
    hi_x = std::max(hi_x, x);
    lo_y = std::min(lo_y, y);
    hi_y = std::max(hi_y, y);
  }
  void Pad() {
    if (!(hi_x > lo_x)) { lo_x -= 1.0; hi_x += 1.0; }
    if (!(hi_y > lo_y)) { lo_y -= 1.0; hi_y += 1.0; }
  }
};

std::string Header() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Num(kWidth) +
         "\" height=\"" + Num(kHeight) + "\" viewBox=\"0 0 " + Num(kWidth) + " " +
         Num(kHeight) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

double ParseCell(const std::string& cell, const std::string& origin, std::size_t row) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size()) {
    throw DataError(origin, row, "non-numeric cell '" + cell + "'");
  }
  return v;
}

std::size_t Column(const CsvTable& t, const std::string& name, const std::string& origin) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw DataError(origin, 1, "missing column '" + name + "'");
  return static_cast<std::size_t>(it - t.header.begin());
}

}  // namespace

std::string RenderTrajectoriesSvg(std::span<const SceneRecord> records,
                                  std::span<const Trajectory> predictions) {
  Bounds b;
  b.Add(0.0, 0.0);
  for (const auto& r : records) {
    for (const auto& w : r.gt.waypoints()) b.Add(w.x, w.y);
  }
  for (const auto& p : predictions) {
    for (const auto& w : p.waypoints()) b.Add(w.x, w.y);
  }
  b.Pad();
  // Equal scale on both axes: forward (x) maps up, left (y) maps left.
  const double scale = std::min((kHeight - 2 * kMargin) / (b.hi_x - b.lo_x),
                                (kWidth - 2 * kMargin) / (b.hi_y - b.lo_y));
  const double cx = kWidth / 2.0;
  const double y_mid = 0.5 * (b.lo_y + b.hi_y);
  auto sx = [&](const Waypoint& w) { return cx - (w.y - y_mid) * scale; };
  auto sy = [&](const Waypoint& w) { return kHeight - kMargin - (w.x - b.lo_x) * scale; };
  auto polyline = [&](const Trajectory& t, const char* color, bool dashed) {
    std::string pts = Num(sx({0, 0})) + "," + Num(sy({0, 0}));
    for (const auto& w : t.waypoints()) pts += " " + Num(sx(w)) + "," + Num(sy(w));
    return "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\"" + (dashed ? " stroke-dasharray=\"6,4\"" : "") +
           " points=\"" + pts + "\"/>\n";
  };

  std::string svg = Header();
  svg += "<text x=\"12\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">"
         "ground truth (orange) vs prediction (green, dashed)</text>\n";
  for (const auto& r : records) svg += polyline(r.gt, kGroundTruthColor, false);
  for (const auto& p : predictions) svg += polyline(p, kPredictionColor, true);
  // Ego vehicle at the origin.
  svg += "<rect x=\"" + Num(sx({0, 0}) - 5) + "\" y=\"" + Num(sy({0, 0}) - 9) +
         "\" width=\"10\" height=\"18\" fill=\"#444\"/>\n</svg>\n";
  return svg;
}

std::string RenderLineChartSvg(const std::string& title, const std::string& x_label,
                               const std::string& y_label,
                               std::span<const CurveSeries> series) {
  Bounds b;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) b.Add(s.x[i], s.y[i]);
  }
  if (!std::isfinite(b.lo_x)) b.Add(0.0, 0.0);
  b.Pad();
  auto sx = [&](double x) {
    return kMargin + (x - b.lo_x) / (b.hi_x - b.lo_x) * (kWidth - 2 * kMargin);
  };
  auto sy = [&](double y) {
    return kHeight - kMargin - (y - b.lo_y) / (b.hi_y - b.lo_y) * (kHeight - 2 * kMargin);
  };
  std::string svg = Header();
  svg += "<text x=\"" + Num(kMargin) + "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"14\">" + Escape(title) + "</text>\n";
  svg += "<line x1=\"" + Num(kMargin) + "\" y1=\"" + Num(kHeight - kMargin) + "\" x2=\"" +
         Num(kWidth - kMargin) + "\" y2=\"" + Num(kHeight - kMargin) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + Num(kMargin) + "\" y1=\"" + Num(kMargin) + "\" x2=\"" +
         Num(kMargin) + "\" y2=\"" + Num(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + Num(kWidth / 2) + "\" y=\"" + Num(kHeight - 16) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + Escape(x_label) + "</text>\n";
  svg += "<text x=\"8\" y=\"" + Num(kMargin - 8) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + Escape(y_label) + "</text>\n";
  svg += "<text x=\"4\" y=\"" + Num(sy(b.hi_y) + 4) +
         "\" font-family=\"sans-serif\" font-size=\"10\">" + Num(b.hi_y) + "</text>\n";
  svg += "<text x=\"4\" y=\"" + Num(sy(b.lo_y) + 4) +
         "\" font-family=\"sans-serif\" font-size=\"10\">" + Num(b.lo_y) + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % kPalette.size()];
    std::string pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      pts += (i ? " " : "") + Num(sx(s.x[i])) + "," + Num(sy(s.y[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    svg += "<text x=\"" + Num(kWidth - kMargin - 140) + "\" y=\"" +
           Num(kMargin + 16.0 * static_cast<double>(k)) + "\" fill=\"" + color +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + Escape(s.name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

CsvTable ReadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "cannot open for reading");
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      cells.push_back(cell);
    }
    return cells;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
    } else {
      if (cells.size() != table.header.size()) {
        throw DataError(path, lineno, "expected " + std::to_string(table.header.size()) +
                                          " columns, found " + std::to_string(cells.size()));
      }
      table.rows.push_back(std::move(cells));
    }
  }
  if (table.header.empty()) throw DataError(path, 0, "empty CSV file");
  return table;
}

std::string RenderLossCurveSvg(const CsvTable& curve, const std::string& origin) {
  const std::size_t ce = Column(curve, "epoch", origin);
  const std::size_t cp = Column(curve, "scheduled_p", origin);
  const std::size_t cl = Column(curve, "mean_loss", origin);
  CurveSeries loss{"log10 mean_loss", {}, {}};
  CurveSeries prob{"scheduled_p", {}, {}};
  for (std::size_t i = 0; i < curve.rows.size(); ++i) {
    const auto& row = curve.rows[i];
    const double e = ParseCell(row[ce], origin, i + 2);
    const double l = ParseCell(row[cl], origin, i + 2);
    loss.x.push_back(e);
    loss.y.push_back(std::log10(std::max(l, 1e-12)));
    prob.x.push_back(e);
    prob.y.push_back(ParseCell(row[cp], origin, i + 2));
  }
  const std::vector<CurveSeries> series = {loss, prob};
  return RenderLineChartSvg("training curve", "epoch", "value", series);
}

std::string RenderEvalCsvSvg(const CsvTable& report, const std::string& origin) {
  const std::size_t cm = Column(report, "metric", origin);
  const std::size_t ch = Column(report, "horizon_s", origin);
  const std::size_t cv = Column(report, "value", origin);
  const std::size_t cr = Column(report, "rescaled_flag", origin);
  std::map<std::string, CurveSeries> by_name;
  std::vector<std::string> order;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    if (row[cm] != "l2_max" && row[cm] != "l2_avg") continue;
    if (row[ch] == "avg_1to3") continue;
    const std::string name = row[cm] + (row[cr] == "1" ? " (rescaled)" : "");
    if (!by_name.count(name)) {
      order.push_back(name);
      by_name[name].name = name;
    }
    by_name[name].x.push_back(ParseCell(row[ch], origin, i + 2));
    by_name[name].y.push_back(ParseCell(row[cv], origin, i + 2));
  }
  std::vector<CurveSeries> series;
  for (const auto& n : order) series.push_back(by_name[n]);
  return RenderLineChartSvg("displacement error by horizon", "horizon (s)", "meters",
                            series);
}

}  // namespace wpar
