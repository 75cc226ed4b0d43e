// Minimal deterministic SVG rendering: line plots for traces/spectra/curves
// and a rect-grid heatmap for density rasters.  Rendering is a pure function
// of the data; files are written atomically.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "qwire/io.hpp"

namespace qwire {

namespace svgdetail {

inline std::string num(double v, int precision = 2) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed,
                         precision);
  return std::string(buf, r.ptr);
}

inline std::string tick_label(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof(buf), v,
                         std::chars_format::general, 4);
  return std::string(buf, r.ptr);
}

inline const char* series_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  return palette[i % 6];
}

// Blue-green-yellow ramp for heatmaps.
inline std::string heat_color(double u) {
  u = std::clamp(u, 0.0, 1.0);
  const double stops[5][3] = {{68, 1, 84},
                              {59, 82, 139},
                              {33, 145, 140},
                              {94, 201, 98},
                              {253, 231, 37}};
  const double f = u * 4.0;
  const int i = std::min(3, int(f));
  const double w = f - i;
  int rgb[3];
  for (int c = 0; c < 3; ++c)
    rgb[c] = int(std::lround(stops[i][c] * (1.0 - w) + stops[i + 1][c] * w));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return std::string(buf);
}

}  // namespace svgdetail

struct SvgSeries {
  std::string label;
  const std::vector<double>* y = nullptr;
};

struct SvgPlotOptions {
  std::string title, xlabel, ylabel;
  bool log_y = false;
  int width = 960, height = 600;
};

inline void svg_line_plot(const std::filesystem::path& path,
                          const std::vector<double>& x,
                          std::span<const SvgSeries> series,
                          const SvgPlotOptions& opt) {
  using svgdetail::num;
  if (x.empty() || series.empty())
    throw std::invalid_argument("svg_line_plot: empty data");
  const double ml = 70, mr = 20, mt = 36, mb = 50;
  const double pw = opt.width - ml - mr, ph = opt.height - mt - mb;

  double xmin = x.front(), xmax = x.front();
  for (double v : x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
  double ymin = 0, ymax = 0;
  bool first = true;
  for (const auto& s : series)
    for (double v : *s.y) {
      if (opt.log_y && !(v > 0.0)) continue;
      const double w = opt.log_y ? std::log10(v) : v;
      if (first) { ymin = ymax = w; first = false; }
      ymin = std::min(ymin, w);
      ymax = std::max(ymax, w);
    }
  if (first) { ymin = 0.0; ymax = 1.0; }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  if (opt.log_y) ymin = std::max(ymin, ymax - 12.0);  // cap dynamic range

  auto sx = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double v) {
    const double w = opt.log_y ? std::log10(std::max(v, 1e-300)) : v;
    const double c = std::clamp((w - ymin) / (ymax - ymin), 0.0, 1.0);
    return mt + (1.0 - c) * ph;
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(opt.width) + "\" height=\"" +
         std::to_string(opt.height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(ml) + "\" y=\"22\" font-size=\"15\" "
         "font-family=\"sans-serif\">" + opt.title + "</text>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    const double px = sx(fx), py = mt + (1.0 - i / 4.0) * ph;
    out += "<line x1=\"" + num(px) + "\" y1=\"" + num(mt) + "\" x2=\"" +
           num(px) + "\" y2=\"" + num(mt + ph) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(py) + "\" x2=\"" +
           num(ml + pw) + "\" y2=\"" + num(py) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + num(px) + "\" y=\"" + num(mt + ph + 18) +
           "\" font-size=\"11\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\">" + svgdetail::tick_label(fx) +
           "</text>\n";
    const std::string ylab = opt.log_y
                                 ? ("1e" + svgdetail::tick_label(fy))
                                 : svgdetail::tick_label(fy);
    out += "<text x=\"" + num(ml - 6) + "\" y=\"" + num(py + 4) +
           "\" font-size=\"11\" text-anchor=\"end\" "
           "font-family=\"sans-serif\">" + ylab + "</text>\n";
  }
  out += "<rect x=\"" + num(ml) + "\" y=\"" + num(mt) + "\" width=\"" +
         num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  out += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" +
         num(double(opt.height) - 12.0) +
         "\" font-size=\"13\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\">" + opt.xlabel + "</text>\n";
  out += "<text x=\"16\" y=\"" + num(mt + ph / 2) +
         "\" font-size=\"13\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" transform=\"rotate(-90 16 " +
         num(mt + ph / 2) + ")\">" + opt.ylabel + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    if (ser.y->size() != x.size())
      throw std::invalid_argument("svg_line_plot: ragged series");
    std::string pts;
    pts.reserve(x.size() * 14);
    for (std::size_t i = 0; i < x.size(); ++i) {
      pts += num(sx(x[i]));
      pts += ',';
      pts += num(sy((*ser.y)[i]));
      pts += ' ';
    }
    out += "<polyline fill=\"none\" stroke=\"";
    out += svgdetail::series_color(s);
    out += "\" stroke-width=\"1.3\" points=\"" + pts + "\"/>\n";
    out += "<text x=\"" + num(ml + pw - 8) + "\" y=\"" +
           num(mt + 16 + 16.0 * double(s)) +
           "\" font-size=\"12\" text-anchor=\"end\" fill=\"" +
           svgdetail::series_color(s) + "\" font-family=\"sans-serif\">" +
           ser.label + "</text>\n";
  }
  out += "</svg>\n";
  atomic_write_file(path, out);
}

template <typename Map>
inline void svg_heatmap(const std::filesystem::path& path, const Map& map,
                        const std::string& title, int max_cells = 240) {
  using svgdetail::num;
  const std::size_t nt = map.times.size(), nx = map.positions.size();
  if (nt == 0 || nx == 0) throw std::invalid_argument("svg_heatmap: empty map");
  const std::size_t st = std::max<std::size_t>(1, nt / std::size_t(max_cells));
  const std::size_t sx = std::max<std::size_t>(1, nx / std::size_t(max_cells));
  double vmax = 0.0;
  for (const auto& row : map.rho)
    for (double v : row) vmax = std::max(vmax, v);
  if (vmax <= 0.0) vmax = 1.0;

  const int width = 960, height = 640;
  const double ml = 70, mr = 20, mt = 36, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(ml) + "\" y=\"22\" font-size=\"15\" "
         "font-family=\"sans-serif\">" + title + "</text>\n";
  const std::size_t cols = (nx + sx - 1) / sx, rows = (nt + st - 1) / st;
  const double cw = pw / double(cols), chh = ph / double(rows);
  for (std::size_t it = 0, r = 0; it < nt; it += st, ++r) {
    for (std::size_t ix = 0, c = 0; ix < nx; ix += sx, ++c) {
      const double u = map.rho[it][ix] / vmax;
      out += "<rect x=\"" + num(ml + double(c) * cw) + "\" y=\"" +
             num(mt + ph - double(r + 1) * chh) + "\" width=\"" +
             num(cw + 0.5) + "\" height=\"" + num(chh + 0.5) + "\" fill=\"" +
             svgdetail::heat_color(u) + "\"/>\n";
    }
  }
  out += "<rect x=\"" + num(ml) + "\" y=\"" + num(mt) + "\" width=\"" +
         num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  out += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" + num(height - 12.0) +
         "\" font-size=\"13\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\">x (nm), " +
         svgdetail::tick_label(map.positions.front()) + " to " +
         svgdetail::tick_label(map.positions.back()) + "</text>\n";
  out += "<text x=\"16\" y=\"" + num(mt + ph / 2) +
         "\" font-size=\"13\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" transform=\"rotate(-90 16 " +
         num(mt + ph / 2) + ")\">t (fs), " +
         svgdetail::tick_label(map.times.front()) + " to " +
         svgdetail::tick_label(map.times.back()) + "</text>\n";
  out += "</svg>\n";
  atomic_write_file(path, out);
}

}  // namespace qwire
