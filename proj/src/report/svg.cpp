#include "lesionrl/report/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace lesionrl::report {

namespace {

constexpr double kWidth = 720, kPanel = 360;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  if (v != 0.0 && (std::abs(v) >= 1e4 || std::abs(v) < 1e-2)) {
    std::snprintf(buf, sizeof buf, "%.1e", v);
  } else {
    std::snprintf(buf, sizeof buf, "%g", std::round(v * 1e6) / 1e6);
  }
  return buf;
}

std::string escape(const std::string& s) {
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

// Tick step of 1, 2 or 5 times a power of ten giving about `target` ticks.
double nice_step(double span, int target = 5) {
  if (!(span > 0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return mag * (f < 1.5 ? 1 : f < 3.5 ? 2 : f < 7.5 ? 5 : 10);
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (lo > hi) lo = 0, hi = 1;
    if (lo == hi) lo -= 0.5, hi += 0.5;
  }
};

void frame(std::ostream& out, const Axes& axes, double y0, const Range& xr, const Range& yr) {
  const double pw = kWidth - kLeft - kRight, ph = kPanel - kTop - kBottom;
  const double top = y0 + kTop;
  out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(y0 + 22)
      << "\" text-anchor=\"middle\" font-size=\"15\">" << escape(axes.title) << "</text>\n";
  out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  const double xs = nice_step(xr.hi - xr.lo), ys = nice_step(yr.hi - yr.lo);
  for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-9 * xs; t += xs) {
    const double px = kLeft + (t - xr.lo) / (xr.hi - xr.lo) * pw;
    out << "<line x1=\"" << num(px) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(px)
        << "\" y2=\"" << num(top + ph + 5) << "\" stroke=\"#333\"/>\n"
        << "<text x=\"" << num(px) << "\" y=\"" << num(top + ph + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(t) << "</text>\n";
  }
  for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-9 * ys; t += ys) {
    const double py = top + ph - (t - yr.lo) / (yr.hi - yr.lo) * ph;
    out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kLeft + pw)
        << "\" y2=\"" << num(py) << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(t) << "</text>\n";
  }
  out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(top + ph + 38)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(axes.x_label) << "</text>\n";
  out << "<text transform=\"translate(" << num(18) << ',' << num(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(axes.y_label)
      << "</text>\n";
}

void line_panel(std::ostream& out, const Axes& axes, const std::vector<Series>& series, double y0) {
  Range xr, yr;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xr.add(x);
      yr.add(y);
    }
  }
  if (axes.y_lo < axes.y_hi) yr.lo = axes.y_lo, yr.hi = axes.y_hi;
  xr.finish();
  yr.finish();
  frame(out, axes, y0, xr, yr);

  const double pw = kWidth - kLeft - kRight, ph = kPanel - kTop - kBottom;
  const double top = y0 + kTop;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return top + ph - (std::clamp(y, yr.lo, yr.hi) - yr.lo) / (yr.hi - yr.lo) * ph; };
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kColors[i % std::size(kColors)];
    if (!s.points.empty()) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [x, y] : s.points) out << num(px(x)) << ',' << num(py(y)) << ' ';
      out << "\"/>\n";
      if (s.markers) {
        for (const auto& [x, y] : s.points) {
          out << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"2.5\" fill=\""
              << color << "\"/>\n";
        }
      }
    }
    const double ly = top + 14 + 18 * static_cast<double>(i);
    out << "<line x1=\"" << num(kWidth - kRight + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(kWidth - kRight + 32) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << num(kWidth - kRight + 38) << "\" y=\"" << num(ly + 4)
        << "\" font-size=\"11\">" << escape(s.label) << "</text>\n";
  }
}

void header(std::ostream& out, double height) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(height)
      << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

void line_chart(std::ostream& out, const Axes& axes, const std::vector<Series>& series) {
  stacked_line_charts(out, {{axes, series}});
}

void stacked_line_charts(std::ostream& out,
                         const std::vector<std::pair<Axes, std::vector<Series>>>& panels) {
  header(out, kPanel * static_cast<double>(std::max<std::size_t>(panels.size(), 1)));
  for (std::size_t i = 0; i < panels.size(); ++i) {
    line_panel(out, panels[i].first, panels[i].second, kPanel * static_cast<double>(i));
  }
  out << "</svg>\n";
}

void bar_chart(std::ostream& out, const Axes& axes, const std::vector<Bar>& bars) {
  header(out, kPanel);
  Range yr;
  yr.add(0.0);
  for (const auto& b : bars) yr.add(b.value + b.error);
  if (axes.y_lo < axes.y_hi) yr.lo = axes.y_lo, yr.hi = axes.y_hi;
  yr.finish();
  // Category axis, so the frame is drawn here rather than by frame().
  const double pw = kWidth - kLeft - kRight, ph = kPanel - kTop - kBottom;
  const double top = kTop;
  out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(axes.title) << "</text>\n"
      << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  const double ys = nice_step(yr.hi - yr.lo);
  auto py = [&](double y) { return top + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };
  for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-9 * ys; t += ys) {
    out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(kLeft + pw)
        << "\" y2=\"" << num(py(t)) << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(t) + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(t) << "</text>\n";
  }
  out << "<text transform=\"translate(18," << num(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(axes.y_label)
      << "</text>\n";
  const double slot = pw / static_cast<double>(std::max<std::size_t>(bars.size(), 1));
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& b = bars[i];
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    const double bw = slot * 0.5;
    out << "<rect x=\"" << num(cx - bw / 2) << "\" y=\"" << num(py(b.value)) << "\" width=\""
        << num(bw) << "\" height=\"" << num(py(yr.lo) - py(b.value)) << "\" fill=\""
        << kColors[i % std::size(kColors)] << "\"/>\n";
    if (b.error > 0) {
      const double lo = py(std::max(yr.lo, b.value - b.error));
      const double hi = py(std::min(yr.hi, b.value + b.error));
      out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(lo) << "\" x2=\"" << num(cx)
          << "\" y2=\"" << num(hi) << "\" stroke=\"#000\"/>\n"
          << "<line x1=\"" << num(cx - 8) << "\" y1=\"" << num(hi) << "\" x2=\"" << num(cx + 8)
          << "\" y2=\"" << num(hi) << "\" stroke=\"#000\"/>\n"
          << "<line x1=\"" << num(cx - 8) << "\" y1=\"" << num(lo) << "\" x2=\"" << num(cx + 8)
          << "\" y2=\"" << num(lo) << "\" stroke=\"#000\"/>\n";
    }
    out << "<text x=\"" << num(cx) << "\" y=\"" << num(top + ph + 18)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(b.label) << "</text>\n"
        << "<text x=\"" << num(cx) << "\" y=\"" << num(py(b.value) - 6)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(b.value) << "</text>\n";
  }
  out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(top + ph + 38)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(axes.x_label) << "</text>\n";
  out << "</svg>\n";
}

}  // namespace lesionrl::report
