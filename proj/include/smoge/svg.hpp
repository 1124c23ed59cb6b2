#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "smoge/selection.hpp"

namespace smoge {

// Minimal line chart of win proportion versus sample size, one polyline per
// candidate K.
inline void write_sweep_svg(const std::string& path,
                            std::span<const SelectionResult> sweep) {
  std::ofstream out(path);
  require(out.good(), "cannot open '" + path + "' for writing");
  const int width = 640, height = 420, pad = 56;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (sweep.empty()) {
    out << "</svg>\n";
    return;
  }
  double n_lo = 1e300, n_hi = -1e300;
  for (const auto& r : sweep) {
    n_lo = std::min(n_lo, static_cast<double>(r.config.n));
    n_hi = std::max(n_hi, static_cast<double>(r.config.n));
  }
  if (n_hi <= n_lo) n_hi = n_lo + 1.0;
  auto px = [&](double n) {
    return pad + (std::log(n) - std::log(n_lo)) / (std::log(n_hi) - std::log(n_lo)) *
                     (width - 2 * pad);
  };
  auto py = [&](double prop) { return height - pad - prop * (height - 2 * pad); };

  out << "<line x1=\"" << pad << "\" y1=\"" << py(0) << "\" x2=\"" << width - pad
      << "\" y2=\"" << py(0) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << py(0) << "\" x2=\"" << pad << "\" y2=\""
      << py(1) << "\" stroke=\"black\"/>\n";
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0})
    out << "<text x=\"" << pad - 38 << "\" y=\"" << py(tick) + 4 << "\" font-size=\"11\">"
        << detail::two_decimals(tick) << "</text>\n";
  for (const auto& r : sweep)
    out << "<text x=\"" << px(r.config.n) - 8 << "\" y=\"" << height - pad + 16
        << "\" font-size=\"11\">" << r.config.n << "</text>\n";
  out << "<text x=\"" << width / 2 - 40 << "\" y=\"" << height - 12
      << "\" font-size=\"12\">sample size n</text>\n";
  out << "<text x=\"12\" y=\"" << height / 2
      << "\" font-size=\"12\" transform=\"rotate(-90 12 " << height / 2
      << ")\">win proportion</text>\n";

  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2"};
  const auto& candidates = sweep.front().candidates;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    const char* color = colors[ci % 7];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& r : sweep)
      out << px(r.config.n) << "," << py(r.win_proportions[ci]) << " ";
    out << "\"/>\n";
    out << "<text x=\"" << width - pad + 6 << "\" y=\"" << pad + 16 * ci + 10
        << "\" font-size=\"11\" fill=\"" << color << "\">K=" << candidates[ci] << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace smoge
