#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "genie/eval.hpp"

namespace genie {

// Hand-emitted scatter plot, fixed 800x800 viewBox, no plot dependency.
// Class color table (label % 10):
//   0 #1f77b4  1 #ff7f0e  2 #2ca02c  3 #d62728  4 #9467bd
//   5 #8c564b  6 #e377c2  7 #7f7f7f  8 #bcbd22  9 #17becf
inline const std::array<const char*, 10>& svg_class_colors() {
  static const std::array<const char*, 10> kColors = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return kColors;
}

namespace detail {

inline std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

// One marker shape per method, all drawn with the class color.
inline std::string svg_marker(const std::string& method, double x, double y, const char* color) {
  const std::string xs = fmt1(x), ys = fmt1(y);
  if (method == "real")
    return "<circle cx=\"" + xs + "\" cy=\"" + ys + "\" r=\"3\" fill=\"" + color + "\"/>";
  if (method == "genie")
    return "<path d=\"M" + fmt1(x - 3) + " " + fmt1(y - 3) + " L" + fmt1(x + 3) + " " +
           fmt1(y + 3) + " M" + fmt1(x - 3) + " " + fmt1(y + 3) + " L" + fmt1(x + 3) + " " +
           fmt1(y - 3) + "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>";
  if (method == "condsample")
    return "<path d=\"M" + xs + " " + fmt1(y - 4) + " L" + fmt1(x + 3.5) + " " + fmt1(y + 3) +
           " L" + fmt1(x - 3.5) + " " + fmt1(y + 3) + " Z\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>";
  if (method == "img2img")
    return "<rect x=\"" + fmt1(x - 3) + "\" y=\"" + fmt1(y - 3) +
           "\" width=\"6\" height=\"6\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>";
  if (method == "traditional")
    return "<path d=\"M" + xs + " " + fmt1(y - 4) + " L" + fmt1(x + 4) + " " + ys + " L" + xs +
           " " + fmt1(y + 4) + " L" + fmt1(x - 4) + " " + ys + " Z\" fill=\"none\" stroke=\"" +
           color + "\" stroke-width=\"1.5\"/>";
  // cutmix / mixup / anything else: plus sign
  return "<path d=\"M" + fmt1(x - 3) + " " + ys + " L" + fmt1(x + 3) + " " + ys + " M" + xs +
         " " + fmt1(y - 3) + " L" + xs + " " + fmt1(y + 3) + "\" stroke=\"" + color +
         "\" stroke-width=\"1.5\"/>";
}

}  // namespace detail

inline std::string render_boundary_svg(const BoundaryReport& report) {
  constexpr double kSize = 800.0;
  constexpr double kPad = 60.0;

  double lo_x = 0.0, hi_x = 1.0, lo_y = 0.0, hi_y = 1.0;
  if (!report.points.empty()) {
    lo_x = hi_x = report.points.front().px;
    lo_y = hi_y = report.points.front().py;
    for (const auto& p : report.points) {
      lo_x = std::min(lo_x, p.px);
      hi_x = std::max(hi_x, p.px);
      lo_y = std::min(lo_y, p.py);
      hi_y = std::max(hi_y, p.py);
    }
  }
  const double span_x = std::max(hi_x - lo_x, 1e-9);
  const double span_y = std::max(hi_y - lo_y, 1e-9);
  const auto sx = [&](double v) { return kPad + (v - lo_x) / span_x * (kSize - 2 * kPad); };
  const auto sy = [&](double v) { return kSize - kPad - (v - lo_y) / span_y * (kSize - 2 * kPad); };

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\" width=\"800\" "
      "height=\"800\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + detail::fmt1(kPad) + "\" y=\"" + detail::fmt1(kPad) + "\" width=\"" +
         detail::fmt1(kSize - 2 * kPad) + "\" height=\"" + detail::fmt1(kSize - 2 * kPad) +
         "\" fill=\"none\" stroke=\"#cccccc\"/>\n";

  for (const auto& p : report.points) {
    const char* color = svg_class_colors()[static_cast<std::size_t>(p.label) % 10];
    svg += detail::svg_marker(p.method, sx(p.px), sy(p.py), color) + "\n";
  }

  // Legend: marker shape per method (drawn in neutral gray), mean margin.
  double ly = 24.0;
  for (const auto& s : report.stats) {
    svg += detail::svg_marker(s.method, 24.0, ly - 4.0, "#444444");
    char label[160];
    std::snprintf(label, sizeof(label), "%s (n=%zu, mean margin %.3f)", s.method.c_str(), s.count,
                  s.mean_margin);
    svg += "<text x=\"36\" y=\"" + detail::fmt1(ly) +
           "\" font-family=\"monospace\" font-size=\"13\" fill=\"#222222\">" + label +
           "</text>\n";
    ly += 18.0;
  }
  svg += "<text x=\"36\" y=\"" + detail::fmt1(ly) +
         "\" font-family=\"monospace\" font-size=\"13\" fill=\"#222222\">projection: " +
         report.projection + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace genie
