#include "stx/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "format.hpp"

namespace stx {

namespace {

using detail::fmt_fixed;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return !(lo <= hi); }
};

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  // Maps a data value into [0, 1].
  double unit(double v) const {
    const double a = log ? std::log10(v) : v;
    return (a - lo) / (hi - lo);
  }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

Axis make_axis(Range r, bool log) {
  Axis ax;
  ax.log = log;
  if (r.empty()) return ax;
  if (log) {
    ax.lo = std::floor(std::log10(r.lo));
    ax.hi = std::ceil(std::log10(r.hi));
    if (ax.hi <= ax.lo) ax.hi = ax.lo + 1.0;
    return ax;
  }
  ax.lo = r.lo;
  ax.hi = r.hi;
  if (ax.hi == ax.lo) {
    const double pad = ax.lo == 0.0 ? 1.0 : std::abs(ax.lo) * 0.1;
    ax.lo -= pad;
    ax.hi += pad;
  }
  return ax;
}

std::vector<double> ticks(const Axis& ax) {
  std::vector<double> out;
  if (ax.log) {
    for (double e = ax.lo; e <= ax.hi + 1e-9; e += 1.0) out.push_back(std::pow(10.0, e));
    return out;
  }
  for (int i = 0; i <= 4; ++i) out.push_back(ax.lo + (ax.hi - ax.lo) * i / 4.0);
  return out;
}

std::string tick_label(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
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

}  // namespace

std::string render_svg(const ChartSpec& spec) {
  const double left = 80, right = spec.y2_label.empty() ? 30 : 80, top = 40, bottom = 60;
  const double pw = spec.width - left - right, ph = spec.height - top - bottom;

  Range rx, ry, ry2;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], spec.log_x)) continue;
      if (s.secondary_axis) {
        if (std::isfinite(s.y[i])) {
          rx.add(s.x[i]);
          ry2.add(s.y[i]);
        }
      } else if (usable(s.y[i], spec.log_y)) {
        rx.add(s.x[i]);
        ry.add(s.y[i]);
      }
    }
  }
  const Axis ax = make_axis(rx, spec.log_x);
  const Axis ay = make_axis(ry, spec.log_y);
  const Axis ay2 = make_axis(ry2, false);
  auto px = [&](double v) { return left + ax.unit(v) * pw; };
  auto py = [&](const Axis& a, double v) { return top + (1.0 - a.unit(v)) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
     << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fmt_fixed(spec.width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << fmt_fixed(left) << "\" y=\"" << fmt_fixed(top) << "\" width=\"" << fmt_fixed(pw)
     << "\" height=\"" << fmt_fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : ticks(ax)) {
    const double x = px(t);
    os << "<line x1=\"" << fmt_fixed(x) << "\" y1=\"" << fmt_fixed(top + ph) << "\" x2=\"" << fmt_fixed(x)
       << "\" y2=\"" << fmt_fixed(top + ph + 5) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << fmt_fixed(x) << "\" y=\"" << fmt_fixed(top + ph + 18) << "\" text-anchor=\"middle\">"
       << tick_label(t) << "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double y = py(ay, t);
    os << "<line x1=\"" << fmt_fixed(left - 5) << "\" y1=\"" << fmt_fixed(y) << "\" x2=\"" << fmt_fixed(left)
       << "\" y2=\"" << fmt_fixed(y) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << fmt_fixed(left - 8) << "\" y=\"" << fmt_fixed(y + 4) << "\" text-anchor=\"end\">"
       << tick_label(t) << "</text>\n";
  }
  if (!spec.y2_label.empty()) {
    for (double t : ticks(ay2)) {
      const double y = py(ay2, t);
      os << "<line x1=\"" << fmt_fixed(left + pw) << "\" y1=\"" << fmt_fixed(y) << "\" x2=\""
         << fmt_fixed(left + pw + 5) << "\" y2=\"" << fmt_fixed(y) << "\" stroke=\"black\"/>";
      os << "<text x=\"" << fmt_fixed(left + pw + 8) << "\" y=\"" << fmt_fixed(y + 4) << "\">" << tick_label(t)
         << "</text>\n";
    }
    os << "<text transform=\"translate(" << fmt_fixed(spec.width - 15.0) << "," << fmt_fixed(top + ph / 2)
       << ") rotate(90)\" text-anchor=\"middle\">" << escape(spec.y2_label) << "</text>\n";
  }
  os << "<text x=\"" << fmt_fixed(left + pw / 2) << "\" y=\"" << fmt_fixed(spec.height - 15.0)
     << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << fmt_fixed(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(spec.y_label) << "</text>\n";

  double legend_y = top + 14;
  for (const auto& s : spec.series) {
    const Axis& a = s.secondary_axis ? ay2 : ay;
    const bool ylog = !s.secondary_axis && spec.log_y;
    if (s.style == SeriesStyle::Line) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
        if (!usable(s.x[i], spec.log_x) || !usable(s.y[i], ylog)) continue;
        os << (first ? "" : " ") << fmt_fixed(px(s.x[i])) << "," << fmt_fixed(py(a, s.y[i]));
        first = false;
      }
      os << "\"/>\n";
    } else {
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
        if (!usable(s.x[i], spec.log_x) || !usable(s.y[i], ylog)) continue;
        os << "<circle cx=\"" << fmt_fixed(px(s.x[i])) << "\" cy=\"" << fmt_fixed(py(a, s.y[i]))
           << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      }
    }
    if (!s.label.empty()) {
      os << "<text x=\"" << fmt_fixed(left + 10) << "\" y=\"" << fmt_fixed(legend_y) << "\" fill=\"" << s.color
         << "\">" << escape(s.label) << "</text>\n";
      legend_y += 16;
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace stx
