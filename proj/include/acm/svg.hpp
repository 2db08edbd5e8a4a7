#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "acm/csv.hpp"

namespace acm {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
  bool markers = false;  // draw points instead of a polyline
};

struct LineChart {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<Series> series;
  std::vector<std::string> notes;  // extra text lines under the title
  int width = 800;
  int height = 500;
};

inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  std::vector<double> t;
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// SVG 1.1 document with axes, ticks, a legend and one path per series.
inline std::string render_svg(const LineChart& c) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : c.series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) {
    const double pad = std::max(1e-12, std::abs(y0) * 0.1);
    y0 -= pad;
    y1 += pad;
  }
  const double ypad = 0.05 * (y1 - y0);
  y0 -= ypad;
  y1 += ypad;
  const double L = 80, R = 180, T = 50 + 16.0 * c.notes.size(), B = 60;
  const double W = c.width - L - R, H = c.height - T - B;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * W; };
  auto py = [&](double y) { return T + (1.0 - (y - y0) / (y1 - y0)) * H; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
    << "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << c.width << "\" height=\"" << c.height
    << "\" viewBox=\"0 0 " << c.width << ' ' << c.height << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << c.width << "\" height=\"" << c.height << "\" fill=\"white\"/>\n"
    << "<text x=\"" << c.width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << xml_escape(c.title) << "</text>\n";
  for (std::size_t i = 0; i < c.notes.size(); ++i)
    o << "<text x=\"" << c.width / 2 << "\" y=\"" << 42 + 16 * i
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(c.notes[i]) << "</text>\n";
  o << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
    << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W << "\" height=\"" << H << "\"/>\n";
  const auto xt = nice_ticks(x0, x1), yt = nice_ticks(y0, y1);
  for (double v : xt) o << "<line x1=\"" << px(v) << "\" y1=\"" << T + H << "\" x2=\"" << px(v) << "\" y2=\"" << T + H + 5 << "\"/>\n";
  for (double v : yt) o << "<line x1=\"" << L - 5 << "\" y1=\"" << py(v) << "\" x2=\"" << L << "\" y2=\"" << py(v) << "\"/>\n";
  if (y0 < 0 && y1 > 0)
    o << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << L + W << "\" y2=\"" << py(0)
      << "\" stroke=\"#999999\" stroke-dasharray=\"2,3\"/>\n";
  o << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double v : xt)
    o << "<text x=\"" << px(v) << "\" y=\"" << T + H + 18 << "\" text-anchor=\"middle\">" << short_number(v) << "</text>\n";
  for (double v : yt)
    o << "<text x=\"" << L - 8 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">" << short_number(v) << "</text>\n";
  o << "<text x=\"" << L + W / 2 << "\" y=\"" << c.height - 15 << "\" text-anchor=\"middle\" font-size=\"13\">"
    << xml_escape(c.xlabel) << "</text>\n"
    << "<text x=\"18\" y=\"" << T + H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
    << T + H / 2 << ")\">" << xml_escape(c.ylabel) << "</text>\n</g>\n";

  for (std::size_t k = 0; k < c.series.size(); ++k) {
    const auto& s = c.series[k];
    if (s.markers) {
      o << "<g fill=\"" << s.color << "\">\n";
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\"/>\n";
      o << "</g>\n";
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
      if (s.dashed) o << " stroke-dasharray=\"6,4\"";
      o << " points=\"";
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      o << "\"/>\n";
    }
    const double ly = T + 14 + 18.0 * k;
    o << "<line x1=\"" << L + W + 12 << "\" y1=\"" << ly << "\" x2=\"" << L + W + 36 << "\" y2=\"" << ly << "\" stroke=\""
      << s.color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n"
      << "<text x=\"" << L + W + 42 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << xml_escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace acm
