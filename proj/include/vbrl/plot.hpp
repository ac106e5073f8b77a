#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "vbrl/harness.hpp"

namespace vbrl::harness {

struct PlotOptions {
  std::string title = "Failure rate vs. dataset size";
  double width = 640.0;
  double height = 420.0;
};

// SVG layout: the data area is a <g class="plot-area"> whose transform flips
// the y axis, so inside it y grows with the failure rate and a decreasing
// series has decreasing y coordinates. With H = plot height in pixels,
//   failure rate = y / H
// for every polyline point and band vertex. The x axis is log10(episodes).
// Polylines carry data-loss, data-n and data-mean; band polygons carry
// data-loss, data-n, data-lower and data-upper (comma-separated, by size).

/// Throws std::invalid_argument on an empty summary list.
void emit_plot(std::span<const CiSummary> summaries, std::ostream& os, const PlotOptions& options = {});
void emit_plot(std::span<const CiSummary> summaries, const std::filesystem::path& path,
               const PlotOptions& options = {});

}  // namespace vbrl::harness
