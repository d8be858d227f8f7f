#pragma once

// Minimal deterministic SVG line plots for run artifacts.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "wavetail/common.hpp"
#include "wavetail/io.hpp"

namespace wavetail::svg {

struct Series {
  std::string label;
  std::string color = "#1f6fb2";
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title;
  std::string xlabel, ylabel;
  bool logx = false, logy = false;
  int width = 720, height = 480;
};

inline std::string render(const PlotSpec& spec,
                          const std::vector<Series>& series) {
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
  auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.logy ? std::log10(std::abs(v)) : v; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (spec.logx && s.x[i] <= 0) continue;
      if (spec.logy && s.y[i] == 0) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y1 = y0 + 1;
  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return mt + (y1 - ty(v)) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
    << "\" height=\"" << spec.height << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << spec.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"15\">" << spec.title
    << "</text>\n";
  // frame + ticks
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
    << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0;
    const double fy = y0 + (y1 - y0) * k / 4.0;
    const double gx = ml + pw * k / 4.0, gy = mt + ph - ph * k / 4.0;
    o << "<text x=\"" << gx << "\" y=\"" << spec.height - mb + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"11\">" << (spec.logx ? "1e" : "")
      << io::fmt(spec.logx ? fx : fx).substr(0, 8) << "</text>\n";
    o << "<text x=\"" << ml - 6 << "\" y=\"" << gy + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
      << (spec.logy ? "1e" : "") << io::fmt(spec.logy ? fy : fy).substr(0, 8)
      << "</text>\n";
  }
  o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << spec.height - 10
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
    << spec.xlabel << "</text>\n";
  o << "<text x=\"16\" y=\"" << mt + ph / 2
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
    << "transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">" << spec.ylabel
    << "</text>\n";
  int li = 0;
  for (const auto& s : series) {
    o << "<polyline fill=\"none\" stroke=\"" << s.color
      << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (spec.logx && s.x[i] <= 0) continue;
      if (spec.logy && s.y[i] == 0) continue;
      o << io::fmt(px(s.x[i])) << "," << io::fmt(py(s.y[i])) << " ";
    }
    o << "\"/>\n";
    o << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16 + 16 * li
      << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << s.color
      << "\">" << s.label << "</text>\n";
    ++li;
  }
  o << "</svg>\n";
  return o.str();
}

inline void write_plot(const io::fs::path& path, const PlotSpec& spec,
                       const std::vector<Series>& series) {
  io::write_text(path, render(spec, series));
}

}  // namespace wavetail::svg
