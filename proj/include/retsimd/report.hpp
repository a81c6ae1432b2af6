// Copyright (C) 2026 The RetSimd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace retsimd {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

/// Static SVG charts. Output depends only on the arguments.
std::string svg_bar_chart(const std::string& title, const std::vector<std::pair<std::string, double>>& bars,
                          const std::string& y_label);
std::string svg_line_chart(const std::string& title, const std::vector<Series>& series, const std::string& x_label,
                           const std::string& y_label);

/// Mean and sample standard deviation (0 for fewer than two values).
std::pair<double, double> mean_std(const std::vector<double>& values);

/// Summarizes one or more run directories into `<out_dir>`: summary.json,
/// summary.csv, curves.svg and, where contribution reports exist, gaps.csv
/// and gaps.svg; with several runs differing in segmentation also
/// sensitivity.csv and sensitivity.svg. Reads only files under the runs.
void render_report(const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out_dir);

}  // namespace retsimd
