#include "fuplab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fuplab {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << content;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for read: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string svg_loglog_plot(const PlotSeries& pts, double slope, double intercept,
                            const std::string& title) {
  const int W = 640, H = 480, pad = 60;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  std::vector<double> lx, ly;
  for (size_t i = 0; i < pts.x.size(); ++i) {
    if (pts.x[i] <= 0 || pts.y[i] <= 0) continue;
    lx.push_back(std::log10(pts.x[i]));
    ly.push_back(std::log10(pts.y[i]));
    xmin = std::min(xmin, lx.back());
    xmax = std::max(xmax, lx.back());
    ymin = std::min(ymin, ly.back());
    ymax = std::max(ymax, ly.back());
  }
  if (lx.empty()) {
    xmin = ymin = 0;
    xmax = ymax = 1;
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1;
  if (ymax - ymin < 1e-12) ymax = ymin + 1;
  auto X = [&](double v) { return pad + (v - xmin) / (xmax - xmin) * (W - 2 * pad); };
  auto Y = [&](double v) { return H - pad - (v - ymin) / (ymax - ymin) * (H - 2 * pad); };

  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
     << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
     << "</text>\n";
  os << "<line x1='" << pad << "' y1='" << H - pad << "' x2='" << W - pad << "' y2='"
     << H - pad << "' stroke='black'/>\n";
  os << "<line x1='" << pad << "' y1='" << pad << "' x2='" << pad << "' y2='" << H - pad
     << "' stroke='black'/>\n";
  // fitted line y = slope * x + intercept in natural-log space; convert to log10
  const double l10 = std::log(10.0);
  double fy0 = (slope * (xmin * l10) + intercept) / l10;
  double fy1 = (slope * (xmax * l10) + intercept) / l10;
  os << "<line x1='" << X(xmin) << "' y1='" << Y(fy0) << "' x2='" << X(xmax) << "' y2='"
     << Y(fy1) << "' stroke='steelblue' stroke-width='1.5'/>\n";
  for (size_t i = 0; i < lx.size(); ++i)
    os << "<circle cx='" << X(lx[i]) << "' cy='" << Y(ly[i])
       << "' r='4' fill='crimson'/>\n";
  os << "<text x='" << W / 2 << "' y='" << H - 16
     << "' text-anchor='middle' font-size='12'>log10 h</text>\n";
  os << "<text x='16' y='" << H / 2 << "' font-size='12' transform='rotate(-90 16 "
     << H / 2 << ")'>log10 norm</text>\n</svg>\n";
  return os.str();
}

std::string svg_disks(const std::vector<SvgDisk>& disks, const std::string& title) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& d : disks) {
    xmin = std::min(xmin, d.cx - d.r);
    xmax = std::max(xmax, d.cx + d.r);
    ymin = std::min(ymin, d.cy - d.r);
    ymax = std::max(ymax, d.cy + d.r);
  }
  if (disks.empty()) {
    xmin = ymin = 0;
    xmax = ymax = 1;
  }
  const int W = 640, H = 640, pad = 30;
  double span = std::max(xmax - xmin, ymax - ymin);
  if (span <= 0) span = 1;
  auto X = [&](double v) { return pad + (v - xmin) / span * (W - 2 * pad); };
  auto Y = [&](double v) { return H - pad - (v - ymin) / span * (H - 2 * pad); };
  auto R = [&](double v) { return v / span * (W - 2 * pad); };
  int max_depth = 1;
  for (const auto& d : disks) max_depth = std::max(max_depth, d.depth);

  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
     << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
     << "</text>\n";
  for (const auto& d : disks) {
    int hue = (d.depth * 47) % 360;
    os << "<circle cx='" << X(d.cx) << "' cy='" << Y(d.cy) << "' r='" << R(d.r)
       << "' fill='none' stroke='hsl(" << hue << ",70%,40%)' stroke-width='"
       << std::max(0.3, 2.0 - 0.25 * d.depth) << "'/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace fuplab
