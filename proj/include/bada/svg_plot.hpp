#pragma once

#include <string>
#include <vector>

namespace bada {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained SVG line chart; vlines draws dashed vertical markers (used
// for ground-truth change epochs).
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<PlotSeries>& series,
                           const std::vector<double>& vlines = {}, int width = 860,
                           int height = 440);

struct BarGroup {
  std::string label;
  std::vector<double> values;  // one value per series name, same order
};

std::string svg_bar_chart(const std::string& title, const std::string& y_label,
                          const std::vector<std::string>& series_names,
                          const std::vector<BarGroup>& groups, int width = 860,
                          int height = 440);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace bada
