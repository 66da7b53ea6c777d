#include "intermittent/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace intermittent {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  double t(double v) const {
    const double u = log ? std::log10(v) : v;
    return hi > lo ? (u - lo) / (hi - lo) : 0.5;
  }
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::ceil(lo); e <= hi + 1e-12; e += 1.0) out.push_back(std::pow(10.0, e));
      if (out.size() < 2) out = {std::pow(10.0, lo), std::pow(10.0, hi)};
    } else {
      for (int k = 0; k <= 4; ++k) out.push_back(lo + (hi - lo) * k / 4.0);
    }
    return out;
  }
};

Axis make_axis(const std::vector<double>& v, bool log) {
  Axis a;
  a.log = log;
  double lo = INFINITY, hi = -INFINITY;
  for (double x : v) {
    const double u = log ? std::log10(x) : x;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

}  // namespace

void write_line_svg(std::ostream& os, const PlotSpec& spec, const std::vector<double>& xs,
                    const std::vector<double>& ys) {
  std::vector<double> px, py;
  const std::size_t n = std::min(xs.size(), ys.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double x = xs[k], y = ys[k];
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    if ((spec.log_x && x <= 0) || (spec.log_y && y <= 0)) continue;
    px.push_back(x);
    py.push_back(y);
  }
  const Axis ax = make_axis(px, spec.log_x);
  const Axis ay = make_axis(py, spec.log_y);
  const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + w * ax.t(x); };
  auto sy = [&](double y) { return kTop + h * (1.0 - ay.t(y)); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const double x = sx(t);
    os << "<line x1=\"" << fmt(x) << "\" y1=\"" << kTop + h << "\" x2=\"" << fmt(x) << "\" y2=\""
       << kTop + h + 5 << "\" stroke=\"black\"/>";
    os << "<text x=\"" << fmt(x) << "\" y=\"" << kTop + h + 18 << "\" text-anchor=\"middle\">"
       << fmt(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = sy(t);
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(y) << "\" x2=\"" << kLeft << "\" y2=\""
       << fmt(y) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">"
       << fmt(t) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + w / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
     << escape(spec.x_label) << (spec.log_x ? " (log)" : "") << "</text>\n";
  os << "<text x=\"18\" y=\"" << kTop + h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << kTop + h / 2 << ")\">" << escape(spec.y_label) << (spec.log_y ? " (log)" : "")
     << "</text>\n";
  if (!px.empty()) {
    os << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < px.size(); ++k) {
      os << fmt(sx(px[k])) << ',' << fmt(sy(py[k])) << (k + 1 < px.size() ? " " : "");
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace intermittent
