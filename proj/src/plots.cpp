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

#include "zla/plots.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "zla/io.hpp"

namespace zla {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 170.0;  // room for the legend
constexpr double kTop = 36.0;
constexpr double kBottom = 52.0;

constexpr std::array<const char*, 8> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Tick step of 1, 2 or 5 times a power of ten giving at most ~6 ticks.
double tick_step(double span) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

std::string tick_label(double v) {
  if (std::abs(v - std::round(v)) < 1e-9) return std::to_string(static_cast<long long>(std::round(v)));
  return format_double(v);
}

}  // namespace

std::string line_plot_svg(const PlotFrame& frame, const std::vector<PlotSeries>& series) {
  const double x_span = std::max(frame.x_max - frame.x_min, 1e-9);
  const double y_span = std::max(frame.y_max - frame.y_min, 1e-9);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - frame.x_min) / x_span * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - (y - frame.y_min) / y_span * plot_h; };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
    << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"22\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"14\">" << escape(frame.title) << "</text>\n";

  s << "<g font-family=\"sans-serif\" font-size=\"11\" stroke-width=\"1\">\n";
  const double xs = tick_step(x_span);
  for (double t = std::ceil(frame.x_min / xs) * xs; t <= frame.x_max + 1e-9; t += xs) {
    s << "<line x1=\"" << fixed(px(t)) << "\" y1=\"" << fixed(kTop + plot_h) << "\" x2=\""
      << fixed(px(t)) << "\" y2=\"" << fixed(kTop + plot_h + 4) << "\" stroke=\"black\"/>"
      << "<text x=\"" << fixed(px(t)) << "\" y=\"" << fixed(kTop + plot_h + 17)
      << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  const double ys = tick_step(y_span);
  for (double t = std::ceil(frame.y_min / ys) * ys; t <= frame.y_max + 1e-9; t += ys) {
    s << "<line x1=\"" << fixed(kLeft - 4) << "\" y1=\"" << fixed(py(t)) << "\" x2=\""
      << fixed(kLeft + plot_w) << "\" y2=\"" << fixed(py(t))
      << "\" stroke=\"#dddddd\"/><text x=\"" << fixed(kLeft - 7) << "\" y=\""
      << fixed(py(t) + 4) << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  s << "<rect x=\"" << fixed(kLeft) << "\" y=\"" << fixed(kTop) << "\" width=\""
    << fixed(plot_w) << "\" height=\"" << fixed(plot_h)
    << "\" fill=\"none\" stroke=\"black\"/>\n"
    << "<text x=\"" << fixed(kLeft + plot_w / 2) << "\" y=\"" << fixed(kHeight - 12)
    << "\" text-anchor=\"middle\">" << escape(frame.x_label) << "</text>\n"
    << "<text transform=\"translate(16 " << fixed(kTop + plot_h / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(frame.y_label) << "</text>\n"
    << "</g>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& sr = series[k];
    const char* color = kPalette[k % kPalette.size()];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < sr.y.size(); ++i) {
      if (i > 0) s << ' ';
      s << fixed(px(sr.first_x + static_cast<double>(i))) << ',' << fixed(py(sr.y[i]));
    }
    s << "\"><title>" << escape(sr.label) << "</title></polyline>\n";
    const double ly = kTop + 12 + 18 * static_cast<double>(k);
    s << "<line x1=\"" << fixed(kLeft + plot_w + 12) << "\" y1=\"" << fixed(ly) << "\" x2=\""
      << fixed(kLeft + plot_w + 32) << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/><text x=\"" << fixed(kLeft + plot_w + 38) << "\" y=\""
      << fixed(ly + 4) << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << escape(sr.label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::vector<PlotSeries> cell_series(const AggregateReport& report, const CellReport& cell,
                                    std::size_t window) {
  std::vector<PlotSeries> out;
  for (const auto& curve : cell.curves) {
    std::string label = curve.label;
    if (curve.codes > 1) label += " (" + std::to_string(curve.codes) + ")";
    out.push_back({label, curve.lengths, 1.0});
  }
  if (report.natural && cell.max_len == 30 && cell.a == 40 &&
      report.natural->lengths.size() >= window)
    out.push_back({report.natural->label + " (smoothed)",
                   length_curve(report.natural->lengths, window), 1.0});
  return out;
}

std::vector<std::filesystem::path> make_plots(const AggregateReport& report,
                                              const std::filesystem::path& dir,
                                              std::size_t window) {
  if (report.cells.empty()) throw std::invalid_argument("make_plots: empty report");
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& cell : report.cells) {
    if (cell.skipped) continue;
    const auto series = cell_series(report, cell, window);
    PlotFrame frame;
    frame.title = "max_len=" + std::to_string(cell.max_len) + ", a=" + std::to_string(cell.a);
    frame.x_label = "input frequency rank";
    frame.y_label = "message length";
    frame.x_min = 1.0;
    frame.x_max = static_cast<double>(std::max<std::size_t>(report.n, 2));
    frame.y_min = 1.0;
    frame.y_max = static_cast<double>(std::max<std::size_t>(cell.max_len, 2));
    for (const auto& sr : series)
      for (double v : sr.y) frame.y_max = std::max(frame.y_max, std::ceil(v));
    const auto path = dir / ("lengths_L" + std::to_string(cell.max_len) + "_a" +
                             std::to_string(cell.a) + ".svg");
    write_file_atomic(path, line_plot_svg(frame, series));
    written.push_back(path);
  }
  return written;
}

}  // namespace zla
