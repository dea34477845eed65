// Copyright Contributors to the voldis Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "voldis/image.hpp"

#include <string>
#include <vector>

namespace voldis {

struct MetricsTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // raw cell strings
};

MetricsTable read_metrics_csv(const std::string& path);

// One polyline curve rasterized onto a plain axes frame.
Image plot_curve(const std::vector<double>& x, const std::vector<double>& y,
                 int width = 480, int height = 320);

struct ReportResult {
  std::string summary;
  std::vector<std::string> plot_files;
};

// Reads <run_dir>/metrics.csv, writes curve PNGs per metric column plus
// summary.txt under <run_dir>/report/. The summary echoes the last CSV row
// verbatim. A header-only CSV reports "no iterations recorded".
ReportResult write_report(const std::string& run_dir);

}  // namespace voldis
