#include "cpd/svg_plot.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <stdexcept>

namespace cpd {

namespace {

constexpr double kWidth = 960.0;
constexpr double kPanelHeight = 240.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 28.0;
constexpr double kPanelGap = 44.0;
constexpr double kMarginBottom = 36.0;
constexpr int kMaxPointsPerLine = 2000;

const char* kPalette[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Panel {
  double top = 0.0;
  double lo = 0.0;
  double hi = 1.0;

  double y(double v) const {
    return top + kPanelHeight - (v - lo) / (hi - lo) * kPanelHeight;
  }
};

Panel make_panel(double top, double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return {top, lo, hi};
}

double x_at(Index t, Index total_len) {
  const double span = kWidth - kMarginLeft - kMarginRight;
  const double frac =
      total_len > 1 ? static_cast<double>(t) / static_cast<double>(total_len - 1) : 0.0;
  return kMarginLeft + frac * span;
}

void frame(std::string& svg, const Panel& panel, const std::string& title) {
  svg += "<rect x=\"" + num(kMarginLeft) + "\" y=\"" + num(panel.top) + "\" width=\"" +
         num(kWidth - kMarginLeft - kMarginRight) + "\" height=\"" + num(kPanelHeight) +
         "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + num(kMarginLeft) + "\" y=\"" + num(panel.top - 8.0) +
         "\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#222\">" + title + "</text>\n";
  svg += "<text x=\"" + num(kMarginLeft - 6.0) + "\" y=\"" + num(panel.top + 12.0) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">" +
         num(panel.hi) + "</text>\n";
  svg += "<text x=\"" + num(kMarginLeft - 6.0) + "\" y=\"" + num(panel.top + kPanelHeight) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">" +
         num(panel.lo) + "</text>\n";
}

void polyline(std::string& svg, const std::string& points, const char* color) {
  svg += "<polyline fill=\"none\" stroke=\"";
  svg += color;
  svg += "\" stroke-width=\"1\" points=\"" + points + "\"/>\n";
}

}  // namespace

std::string render_two_panel_svg(const TimeSeries& series, const ScoreSeries& scores) {
  if (scores.t.empty()) throw std::invalid_argument("render_two_panel_svg: empty score series");
  const Index total_len = series.length();
  const double height = kMarginTop + 2.0 * kPanelHeight + kPanelGap + kMarginBottom;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                    "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
                    num(height) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const Panel signal_panel = make_panel(kMarginTop, series.values().minCoeff(),
                                        series.values().maxCoeff());
  frame(svg, signal_panel, "signal");
  const Index stride = std::max<Index>(1, total_len / kMaxPointsPerLine);
  for (Index c = 0; c < series.dim(); ++c) {
    std::string points;
    for (Index t = 0; t < total_len; t += stride) {
      points += num(x_at(t, total_len)) + "," + num(signal_panel.y(series.values()(t, c))) + " ";
    }
    polyline(svg, points, kPalette[static_cast<std::size_t>(c) % std::size(kPalette)]);
  }

  const Panel score_panel =
      make_panel(kMarginTop + kPanelHeight + kPanelGap, scores.d.minCoeff(), scores.d.maxCoeff());
  frame(svg, score_panel, "dissimilarity");
  std::string points;
  for (std::size_t i = 0; i < scores.t.size(); ++i) {
    points += num(x_at(scores.t[i], total_len)) + "," +
              num(score_panel.y(scores.d(static_cast<Index>(i)))) + " ";
  }
  polyline(svg, points, "#d62728");

  svg += "<text x=\"" + num(kMarginLeft) + "\" y=\"" + num(height - 12.0) +
         "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">t = 0</text>\n";
  svg += "<text x=\"" + num(kWidth - kMarginRight) + "\" y=\"" + num(height - 12.0) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">t = " +
         std::to_string(total_len - 1) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace cpd
