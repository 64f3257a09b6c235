#include "polykam_cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace polykam::cli {

namespace {

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 <= 0) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 <= 0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
    os << "<text x=\"" << coord(px(xv)) << "\" y=\"" << coord(kTop + ph + 18) << "\" text-anchor=\"middle\">" << num(xv)
       << "</text>\n";
    os << "<text x=\"" << coord(kLeft - 6) << "\" y=\"" << coord(py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
       << "</text>\n";
    os << "<line x1=\"" << coord(kLeft) << "\" x2=\"" << coord(kLeft + pw) << "\" y1=\"" << coord(py(yv)) << "\" y2=\""
       << coord(py(yv)) << "\" stroke=\"#ddd\"/>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">" << escape(xlabel)
     << "</text>\n";
  os << "<text transform=\"translate(16 " << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << escape(ylabel)
     << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof *kColors)];
    const std::size_t m = std::min(s.x.size(), s.y.size());
    if (s.markers) {
      os << "<g fill=\"" << color << "\">\n";
      for (std::size_t i = 0; i < m; ++i) {
        os << "<circle cx=\"" << coord(px(s.x[i])) << "\" cy=\"" << coord(py(s.y[i])) << "\" r=\"2\"/>\n";
      }
      os << "</g>\n";
    } else if (m > 0) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < m; ++i) os << (i ? " " : "") << coord(px(s.x[i])) << ',' << coord(py(s.y[i]));
      os << "\"/>\n";
    }
    os << "<text x=\"" << coord(kLeft + 10) << "\" y=\"" << coord(kTop + 16 + 15 * static_cast<double>(k))
       << "\" fill=\"" << color << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace polykam::cli
