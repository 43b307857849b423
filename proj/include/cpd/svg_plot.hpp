#pragma once

#include <string>

#include "cpd/detector.hpp"
#include "cpd/timeseries.hpp"

namespace cpd {

// Static two-panel SVG: the signal columns on top, the dissimilarity curve
// below, on a shared time axis covering the whole series.
std::string render_two_panel_svg(const TimeSeries& series, const ScoreSeries& scores);

}  // namespace cpd
