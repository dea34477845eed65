// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#include "voldis/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace voldis {

MetricsTable read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("report: missing metrics CSV: " + path);
  MetricsTable table;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header) {
      table.columns = cells;
      header = false;
    } else {
      if (cells.size() != table.columns.size())
        throw InputError("report: ragged CSV row in " + path);
      table.rows.push_back(cells);
    }
  }
  if (table.columns.empty()) throw InputError("report: empty metrics CSV: " + path);
  return table;
}

Image plot_curve(const std::vector<double>& x, const std::vector<double>& y,
                 int width, int height) {
  Image img(width, height, 3);
  std::fill(img.data.begin(), img.data.end(), 1.0);  // white

  const int ml = 40, mr = 12, mt = 12, mb = 28;  // margins
  auto draw_px = (height - mt - mb);
  auto draw_py = (width - ml - mr);
  (void)draw_px;
  (void)draw_py;

  auto put = [&](int r, int c, const Vec3& col) {
    if (r >= 0 && r < height && c >= 0 && c < width) img.set_rgb(r, c, col);
  };
  Vec3 axis_col(0.25, 0.25, 0.25), line_col(0.12, 0.35, 0.75);

  // Axes.
  for (int c = ml; c < width - mr; ++c) put(height - mb, c, axis_col);
  for (int r = mt; r <= height - mb; ++r) put(r, ml, axis_col);

  if (x.empty()) return img;
  double xmin = *std::min_element(x.begin(), x.end());
  double xmax = *std::max_element(x.begin(), x.end());
  double ymin = *std::min_element(y.begin(), y.end());
  double ymax = *std::max_element(y.begin(), y.end());
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  auto to_c = [&](double v) {
    return ml + static_cast<int>((v - xmin) / (xmax - xmin) * (width - ml - mr - 1));
  };
  auto to_r = [&](double v) {
    return height - mb - 1 -
           static_cast<int>((v - ymin) / (ymax - ymin) * (height - mt - mb - 1));
  };

  auto draw_line = [&](int r0, int c0, int r1, int c1) {
    int steps = std::max({std::abs(r1 - r0), std::abs(c1 - c0), 1});
    for (int s = 0; s <= steps; ++s) {
      double f = static_cast<double>(s) / steps;
      int r = static_cast<int>(std::lround(r0 + f * (r1 - r0)));
      int c = static_cast<int>(std::lround(c0 + f * (c1 - c0)));
      put(r, c, line_col);
      put(r + 1, c, line_col);
    }
  };

  for (size_t i = 0; i + 1 < x.size(); ++i) {
    if (!std::isfinite(y[i]) || !std::isfinite(y[i + 1])) continue;
    draw_line(to_r(y[i]), to_c(x[i]), to_r(y[i + 1]), to_c(x[i + 1]));
  }
  if (x.size() == 1 && std::isfinite(y[0])) {
    int r = to_r(y[0]), c = to_c(x[0]);
    for (int dr = -2; dr <= 2; ++dr)
      for (int dc = -2; dc <= 2; ++dc) put(r + dr, c + dc, line_col);
  }
  return img;
}

ReportResult write_report(const std::string& run_dir) {
  std::string csv_path = (fs::path(run_dir) / "metrics.csv").string();
  MetricsTable table = read_metrics_csv(csv_path);
  fs::path out_dir = fs::path(run_dir) / "report";
  fs::create_directories(out_dir);

  ReportResult result;
  std::ostringstream summary;
  summary << "run: " << run_dir << "\n";
  summary << "metrics: " << csv_path << "\n";
  summary << "columns:";
  for (const std::string& c : table.columns) summary << " " << c;
  summary << "\n";

  if (table.rows.empty()) {
    summary << "no iterations recorded\n";
  } else {
    summary << "rows: " << table.rows.size() << "\n";
    const auto& last = table.rows.back();
    summary << "final:";
    for (size_t i = 0; i < table.columns.size(); ++i)
      summary << " " << table.columns[i] << "=" << last[i];
    summary << "\n";

    std::vector<double> xs;
    for (const auto& row : table.rows) xs.push_back(std::strtod(row[0].c_str(), nullptr));
    for (size_t col = 1; col < table.columns.size(); ++col) {
      std::vector<double> ys;
      for (const auto& row : table.rows) ys.push_back(std::strtod(row[col].c_str(), nullptr));
      Image plot = plot_curve(xs, ys);
      std::string file = (out_dir / (table.columns[col] + "_curve.png")).string();
      write_png(file, plot);
      result.plot_files.push_back(file);
      summary << "plot: " << file << "\n";
    }
  }

  result.summary = summary.str();
  std::ofstream out(out_dir / "summary.txt");
  if (!out) throw IoError("report: cannot write summary in " + out_dir.string());
  out << result.summary;
  return result;
}

}  // namespace voldis
