#include "bada/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bada {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void expand(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (hi <= lo) {
      lo -= 1.0;
      hi += 1.0;
    } else {
      const double m = 0.05 * (hi - lo);
      lo -= m;
      hi += m;
    }
  }
};

struct Frame {
  int width, height;
  int left = 64, right = 16, top = 40, bottom = 48;
  Range xr, yr;

  double px(double x) const {
    return left + (x - xr.lo) / (xr.hi - xr.lo) * (width - left - right);
  }
  double py(double y) const {
    return height - bottom - (y - yr.lo) / (yr.hi - yr.lo) * (height - top - bottom);
  }
};

void open_svg(std::ostringstream& out, int width, int height, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\" font-weight=\"bold\">" << title
      << "</text>\n";
}

void draw_axes(std::ostringstream& out, const Frame& f, const std::string& x_label,
               const std::string& y_label) {
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  const double x0 = f.left, x1 = f.width - f.right;
  const double y0 = f.height - f.bottom, y1 = f.top;
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
      << "\" stroke=\"#333\"/>\n"
      << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
      << "\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.xr.lo + (f.xr.hi - f.xr.lo) * i / 5.0;
    const double yv = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 5.0;
    out << "<line x1=\"" << f.px(xv) << "\" y1=\"" << y0 << "\" x2=\"" << f.px(xv) << "\" y2=\""
        << y0 + 4 << "\" stroke=\"#333\"/>\n"
        << "<text x=\"" << f.px(xv) << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">"
        << fmt(xv) << "</text>\n"
        << "<line x1=\"" << x0 - 4 << "\" y1=\"" << f.py(yv) << "\" x2=\"" << x0 << "\" y2=\""
        << f.py(yv) << "\" stroke=\"#333\"/>\n"
        << "<text x=\"" << x0 - 7 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">"
        << fmt(yv) << "</text>\n";
  }
  out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << f.height - 10
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n"
      << "<text x=\"14\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 14 " << (y0 + y1) / 2 << ")\">" << y_label << "</text>\n"
      << "</g>\n";
}

void draw_legend(std::ostringstream& out, const Frame& f,
                 const std::vector<std::string>& labels) {
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  double y = f.top + 6;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    const double x = f.width - f.right - 150;
    out << "<rect x=\"" << x << "\" y=\"" << y - 8 << "\" width=\"12\" height=\"12\" fill=\""
        << kPalette[s % kPaletteSize] << "\"/>\n"
        << "<text x=\"" << x + 17 << "\" y=\"" << y + 2 << "\">" << labels[s] << "</text>\n";
    y += 17;
  }
  out << "</g>\n";
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<PlotSeries>& series,
                           const std::vector<double>& vlines, int width, int height) {
  Frame f;
  f.width = width;
  f.height = height;
  bool any = false;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!any) {
        f.xr = {s.x[i], s.x[i]};
        f.yr = {s.y[i], s.y[i]};
        any = true;
      }
      f.xr.expand(s.x[i]);
      f.yr.expand(s.y[i]);
    }
  }
  for (double v : vlines) f.xr.expand(v);
  f.xr.pad();
  f.yr.pad();

  std::ostringstream out;
  open_svg(out, width, height, title);
  draw_axes(out, f, x_label, y_label);
  for (double v : vlines) {
    out << "<line x1=\"" << f.px(v) << "\" y1=\"" << f.top << "\" x2=\"" << f.px(v)
        << "\" y2=\"" << f.height - f.bottom
        << "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n";
  }
  std::vector<std::string> labels;
  for (std::size_t s = 0; s < series.size(); ++s) {
    labels.push_back(series[s].label);
    if (series[s].x.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[s % kPaletteSize]
        << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      out << fmt(f.px(series[s].x[i])) << "," << fmt(f.py(series[s].y[i])) << " ";
    }
    out << "\"/>\n";
  }
  draw_legend(out, f, labels);
  out << "</svg>\n";
  return out.str();
}

std::string svg_bar_chart(const std::string& title, const std::string& y_label,
                          const std::vector<std::string>& series_names,
                          const std::vector<BarGroup>& groups, int width, int height) {
  Frame f;
  f.width = width;
  f.height = height;
  f.xr = {0.0, std::max<double>(1.0, static_cast<double>(groups.size()))};
  f.yr = {0.0, 0.0};
  for (const auto& g : groups) {
    for (double v : g.values) f.yr.expand(v);
  }
  f.yr.pad();
  f.yr.lo = std::min(f.yr.lo, 0.0);

  std::ostringstream out;
  open_svg(out, width, height, title);
  draw_axes(out, f, "", y_label);
  const double group_width = (f.width - f.left - f.right) / std::max<std::size_t>(1, groups.size());
  const double bar_width = 0.8 * group_width / std::max<std::size_t>(1, series_names.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const double gx = f.left + gi * group_width;
    for (std::size_t s = 0; s < groups[gi].values.size(); ++s) {
      const double v = groups[gi].values[s];
      const double x = gx + 0.1 * group_width + s * bar_width;
      const double y_top = f.py(std::max(v, 0.0));
      const double y_bot = f.py(std::min(v, 0.0));
      out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y_top) << "\" width=\""
          << fmt(bar_width * 0.92) << "\" height=\"" << fmt(std::max(0.5, y_bot - y_top))
          << "\" fill=\"" << kPalette[s % kPaletteSize] << "\"/>\n";
    }
    out << "<text x=\"" << fmt(gx + group_width / 2) << "\" y=\"" << f.height - f.bottom + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << groups[gi].label << "</text>\n";
  }
  draw_legend(out, f, series_names);
  out << "</svg>\n";
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace bada
