#pragma once

#include <string>
#include <vector>

namespace fuplab {

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// Shortest-round-trip formatting for CSV cells.
std::string fmt_double(double v);

struct PlotSeries {
  std::vector<double> x, y;
};

/// Minimal SVG log-log scatter with an optional fitted line.
std::string svg_loglog_plot(const PlotSeries& pts, double slope, double intercept,
                            const std::string& title);

/// SVG rendering of a disk family (schottky iterations).
struct SvgDisk {
  double cx, cy, r;
  int depth;
};
std::string svg_disks(const std::vector<SvgDisk>& disks, const std::string& title);

}  // namespace fuplab
