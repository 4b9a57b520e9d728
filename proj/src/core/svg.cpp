#include "core/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace qpat {

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 72, kRight = 24, kTop = 40, kBottom = 56;

const char* const kPalette[] = {"#1f6fb2", "#c2412d", "#2d8a4e",
                                "#7a4ebf", "#b07c1f", "#3a8f8f"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct AxisRange {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void take(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finalize() {
    if (!(lo <= hi)) {  // no usable points
      lo = 0;
      hi = 1;
    } else if (lo == hi) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

double transform(double v, bool log_axis) {
  return log_axis ? std::log10(v) : v;
}

bool usable(double v, bool log_axis) {
  return std::isfinite(v) && (!log_axis || v > 0);
}

std::vector<double> ticks(const AxisRange& r, bool log_axis) {
  std::vector<double> t;
  if (log_axis) {
    // Integer decades within range; fall back to endpoints when the span
    // covers none.
    for (int d = static_cast<int>(std::ceil(r.lo - 1e-9));
         d <= static_cast<int>(std::floor(r.hi + 1e-9)); ++d)
      t.push_back(d);
    if (t.empty()) t = {r.lo, r.hi};
  } else {
    for (int i = 0; i <= 4; ++i) t.push_back(r.lo + (r.hi - r.lo) * i / 4.0);
  }
  return t;
}

std::string tick_label(double t, bool log_axis) {
  return fmt(log_axis ? std::pow(10.0, t) : t);
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel,
                          const std::vector<PlotSeries>& series, bool logx,
                          bool logy) {
  AxisRange rx, ry;
  for (const auto& s : series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!usable(s.x[i], logx) || !usable(s.y[i], logy)) continue;
      rx.take(transform(s.x[i], logx));
      ry.take(transform(s.y[i], logy));
    }
  }
  rx.finalize();
  ry.finalize();

  auto px = [&](double x) {
    return kLeft + (transform(x, logx) - rx.lo) / (rx.hi - rx.lo) *
                       (kWidth - kLeft - kRight);
  };
  auto py = [&](double y) {
    return kHeight - kBottom - (transform(y, logy) - ry.lo) / (ry.hi - ry.lo) *
                                   (kHeight - kTop - kBottom);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth)
      << "\" height=\"" << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth)
      << " " << fmt(kHeight) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\""
      << " font-family=\"sans-serif\" font-size=\"16\">" << escape_xml(title)
      << "</text>\n";

  // Frame.
  svg << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
      << fmt(kWidth - kLeft - kRight) << "\" height=\""
      << fmt(kHeight - kTop - kBottom)
      << "\" fill=\"none\" stroke=\"#444444\"/>\n";

  for (double t : ticks(rx, logx)) {
    double x = kLeft + (t - rx.lo) / (rx.hi - rx.lo) * (kWidth - kLeft - kRight);
    svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kHeight - kBottom)
        << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(kHeight - kBottom + 5)
        << "\" stroke=\"#444444\"/>\n";
    svg << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kHeight - kBottom + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"11\">" << tick_label(t, logx) << "</text>\n";
  }
  for (double t : ticks(ry, logy)) {
    double y =
        kHeight - kBottom - (t - ry.lo) / (ry.hi - ry.lo) * (kHeight - kTop - kBottom);
    svg << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(y) << "\" x2=\""
        << fmt(kLeft) << "\" y2=\"" << fmt(y) << "\" stroke=\"#444444\"/>\n";
    svg << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\""
        << " font-size=\"11\">" << tick_label(t, logy) << "</text>\n";
  }

  svg << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"" << fmt(kHeight - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"13\">" << escape_xml(xlabel) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << fmt(kHeight / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\""
      << " transform=\"rotate(-90 16 " << fmt(kHeight / 2) << ")\">"
      << escape_xml(ylabel) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    std::ostringstream pts;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!usable(s.x[i], logx) || !usable(s.y[i], logy)) continue;
      if (used) pts << " ";
      pts << fmt(px(s.x[i])) << "," << fmt(py(s.y[i]));
      ++used;
    }
    if (used >= 2)
      svg << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    for (std::size_t i = 0; i < n; ++i) {
      if (!usable(s.x[i], logx) || !usable(s.y[i], logy)) continue;
      svg << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i]))
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    if (!s.label.empty()) {
      double ly = kTop + 16 + 16 * static_cast<double>(si);
      svg << "<line x1=\"" << fmt(kWidth - kRight - 120) << "\" y1=\"" << fmt(ly - 4)
          << "\" x2=\"" << fmt(kWidth - kRight - 100) << "\" y2=\"" << fmt(ly - 4)
          << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
      svg << "<text x=\"" << fmt(kWidth - kRight - 94) << "\" y=\"" << fmt(ly)
          << "\" font-family=\"sans-serif\" font-size=\"11\">"
          << escape_xml(s.label) << "</text>\n";
    }
  }

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace qpat
