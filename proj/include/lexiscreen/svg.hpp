#pragma once

// Self-contained SVG plots. Coordinates are printed with fixed precision so
// output bytes depend only on the plotted values.

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "lexiscreen/text_io.hpp"

namespace lexiscreen::svg {

struct Series {
  std::string name;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

struct Frame {
  double width = 480, height = 320;
  double left = 60, right = 20, top = 30, bottom = 45;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

inline std::string num(double v) { return text::format_fixed(v, 2); }

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string text_at(double x, double y, std::string_view s, std::string_view anchor = "middle",
                           int size = 12) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) +
         "\" text-anchor=\"" + std::string(anchor) + "\">" + escape(s) + "</text>\n";
}

inline std::string axes(const Frame& f, std::string_view title, std::string_view xlabel,
                        std::string_view ylabel, double dx, double dy, int xdigits = 0, int ydigits = 2) {
  std::string s;
  s += "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" +
       num(f.width - f.left - f.right) + "\" height=\"" + num(f.height - f.top - f.bottom) +
       "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double x = f.x0; x <= f.x1 + 1e-9; x += dx) {
    s += text_at(f.px(x), f.height - f.bottom + 16, text::format_fixed(x, xdigits));
  }
  for (double y = f.y0; y <= f.y1 + 1e-9; y += dy) {
    s += text_at(f.left - 6, f.py(y) + 4, text::format_fixed(y, ydigits), "end");
    s += "<line x1=\"" + num(f.left) + "\" y1=\"" + num(f.py(y)) + "\" x2=\"" + num(f.width - f.right) +
         "\" y2=\"" + num(f.py(y)) + "\" stroke=\"#ddd\"/>\n";
  }
  s += text_at((f.left + f.width - f.right) / 2, 18, title, "middle", 14);
  s += text_at((f.left + f.width - f.right) / 2, f.height - 8, xlabel);
  s += "<text x=\"14\" y=\"" + num((f.top + f.height - f.bottom) / 2) +
       "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       num((f.top + f.height - f.bottom) / 2) + ")\">" + escape(ylabel) + "</text>\n";
  return s;
}

inline std::string document(double width, double height, const std::string& body) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
         "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body + "</svg>\n";
}

/// Polylines with point markers and a legend.
inline std::string line_chart(std::span<const Series> series, std::string_view title,
                              std::string_view xlabel, std::string_view ylabel) {
  Frame f;
  double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = 1.0;
  for (const auto& s : series) {
    for (double x : s.x) xmin = std::min(xmin, x), xmax = std::max(xmax, x);
    for (double y : s.y) ymin = std::min(ymin, y), ymax = std::max(ymax, y);
  }
  if (xmin >= xmax) xmin -= 1, xmax += 1;
  f.x0 = xmin, f.x1 = xmax, f.y0 = ymin < 0 ? -1.0 : 0.0, f.y1 = std::max(1.0, ymax);
  std::string body = axes(f, title, xlabel, ylabel, 1.0, (f.y1 - f.y0) / 4);
  double ly = f.top + 14;
  for (const auto& s : series) {
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) pts += (i ? " " : "") + num(f.px(s.x[i])) + "," + num(f.py(s.y[i]));
    body += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      body += "<circle cx=\"" + num(f.px(s.x[i])) + "\" cy=\"" + num(f.py(s.y[i])) + "\" r=\"3\" fill=\"" +
              s.color + "\"/>\n";
    }
    body += "<line x1=\"" + num(f.width - f.right - 110) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
            num(f.width - f.right - 90) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + s.color +
            "\" stroke-width=\"2\"/>\n";
    body += text_at(f.width - f.right - 86, ly, s.name, "start");
    ly += 16;
  }
  return document(f.width, f.height, body);
}

struct Point2 {
  double x = 0, y = 0;
  std::string color;
};

struct Panel {
  std::string xlabel, ylabel;
  std::vector<Point2> points;
};

/// Side-by-side unit-square scatter panels.
inline std::string scatter_panels(std::span<const Panel> panels, std::string_view title) {
  const double w = 320;
  std::string body;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    Frame f;
    f.width = w;
    f.height = 320;
    std::string panel = axes(f, p == 0 ? title : "", panels[p].xlabel, panels[p].ylabel, 0.25, 0.25, 2, 2);
    for (const auto& pt : panels[p].points) {
      panel += "<circle cx=\"" + num(f.px(pt.x)) + "\" cy=\"" + num(f.py(pt.y)) +
               "\" r=\"2.5\" fill-opacity=\"0.7\" fill=\"" + pt.color + "\"/>\n";
    }
    body += "<g transform=\"translate(" + num(w * double(p)) + ",0)\">\n" + panel + "</g>\n";
  }
  return document(w * double(panels.size()), 320, body);
}

/// Horizontal bars, one per label, in the given order.
inline std::string bar_chart(std::span<const std::string> labels, std::span<const double> values,
                             std::string_view title) {
  Frame f;
  f.left = 190;
  f.height = 40 + 18 * double(labels.size()) + 45;
  const double vmax = std::max(1e-12, *std::max_element(values.begin(), values.end()));
  f.x0 = 0, f.x1 = vmax, f.y0 = 0, f.y1 = double(labels.size());
  std::string body = text_at(f.width / 2, 18, title, "middle", 14);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = f.top + 18 * double(i);
    body += "<rect x=\"" + num(f.left) + "\" y=\"" + num(y + 2) + "\" width=\"" +
            num(f.px(values[i]) - f.left) + "\" height=\"14\" fill=\"#4477aa\"/>\n";
    body += text_at(f.left - 6, y + 13, labels[i], "end", 11);
    body += text_at(f.px(values[i]) + 4, y + 13, text::format_fixed(values[i], 3), "start", 10);
  }
  return document(f.width, f.height, body);
}

}  // namespace lexiscreen::svg
