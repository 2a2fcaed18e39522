#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "waypoint_ar/geometry.hpp"
#include "waypoint_ar/record.hpp"

namespace wpar {

// Bird's-eye overlay in the ego frame (forward up, left to the left):
// ground truth solid orange, predictions dashed green.
std::string RenderTrajectoriesSvg(std::span<const SceneRecord> records,
                                  std::span<const Trajectory> predictions);

struct CurveSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

std::string RenderLineChartSvg(const std::string& title, const std::string& x_label,
                               const std::string& y_label,
                               std::span<const CurveSeries> series);

// Reads a CSV file with a header row; returns the header and numeric-or-text
// cells. Throws DataError on ragged rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable ReadCsv(const std::string& path);

// Loss curve CSV (epoch, scheduled_p, mean_loss) -> SVG.
std::string RenderLossCurveSvg(const CsvTable& curve, const std::string& origin);
// Eval CSV (metric, horizon_s, value, rescaled_flag) -> SVG, one line per
// metric/rescaled combination over the horizons.
std::string RenderEvalCsvSvg(const CsvTable& report, const std::string& origin);

}  // namespace wpar
