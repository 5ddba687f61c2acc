// Copyright 2026 The zlalab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal SVG line charts for length-vs-rank curves.

#ifndef ZLA_PLOTS_HPP_
#define ZLA_PLOTS_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "zla/experiment.hpp"

namespace zla {

struct PlotSeries {
  std::string label;
  std::vector<double> y;  // y[k] is drawn at x = first_x + k
  double first_x = 1.0;
};

struct PlotFrame {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_min = 1.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
};

/// Renders a complete standalone SVG document.
std::string line_plot_svg(const PlotFrame& frame, const std::vector<PlotSeries>& series);

/// Series shown for one cell: the report's curves plus, for the cell where
/// human and network codes are comparable (max_len = 30, a = 40), the corpus
/// curve smoothed over `window` consecutive ranks.
std::vector<PlotSeries> cell_series(const AggregateReport& report, const CellReport& cell,
                                    std::size_t window = kDefaultSmoothing);

/// Writes one SVG per non-skipped cell into `dir` and returns the paths.
std::vector<std::filesystem::path> make_plots(const AggregateReport& report,
                                              const std::filesystem::path& dir,
                                              std::size_t window = kDefaultSmoothing);

}  // namespace zla

#endif  // ZLA_PLOTS_HPP_
