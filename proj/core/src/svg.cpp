#include "evotrack/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace evotrack::svg {
namespace {

constexpr double kMarginLeft = 64, kMarginRight = 20, kMarginTop = 36, kMarginBottom = 56;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

void chart_body(std::ostream& out, const std::vector<Trace>& traces, const ChartOptions& opt,
                double y_offset) {
  const double w = opt.width, h = opt.height;
  const double pw = w - kMarginLeft - kMarginRight;
  const double ph = h - kMarginTop - kMarginBottom;

  std::size_t n = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& t : traces) {
    n = std::max(n, t.y.size());
    for (double v : t.y)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  auto px = [&](std::size_t i) {
    return kMarginLeft + (n <= 1 ? pw / 2 : pw * static_cast<double>(i) / static_cast<double>(n - 1));
  };
  auto py = [&](double v) { return y_offset + kMarginTop + ph * (hi - v) / (hi - lo); };

  out << "<text x=\"" << num(w / 2) << "\" y=\"" << num(y_offset + 22)
      << "\" text-anchor=\"middle\" font-size=\"15\">" << escape(opt.title) << "</text>\n";
  out << "<rect x=\"" << num(kMarginLeft) << "\" y=\"" << num(y_offset + kMarginTop) << "\" width=\""
      << num(pw) << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#888\"/>\n";

  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    out << "<line x1=\"" << num(kMarginLeft) << "\" x2=\"" << num(kMarginLeft + pw) << "\" y1=\""
        << num(py(v)) << "\" y2=\"" << num(py(v)) << "\" stroke=\"#eee\"/>\n"
        << "<text x=\"" << num(kMarginLeft - 6) << "\" y=\"" << num(py(v) + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(v) << "</text>\n";
  }
  if (!opt.x_ticks.empty() && n > 0) {
    const std::size_t stride = std::max<std::size_t>(1, (n + 11) / 12);
    for (std::size_t i = 0; i < std::min(n, opt.x_ticks.size()); i += stride)
      out << "<text x=\"" << num(px(i)) << "\" y=\"" << num(y_offset + kMarginTop + ph + 16)
          << "\" text-anchor=\"middle\" font-size=\"10\">" << escape(opt.x_ticks[i])
          << "</text>\n";
  }
  out << "<text x=\"" << num(kMarginLeft + pw / 2) << "\" y=\"" << num(y_offset + h - 12)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(opt.x_label) << "</text>\n";
  out << "<text transform=\"translate(14," << num(y_offset + kMarginTop + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(opt.y_label)
      << "</text>\n";

  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    const auto& t = traces[ti];
    if (t.line && t.y.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << t.color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < t.y.size(); ++i)
        if (std::isfinite(t.y[i])) out << num(px(i)) << ',' << num(py(t.y[i])) << ' ';
      out << "\"/>\n";
    }
    for (std::size_t i = 0; i < t.y.size(); ++i)
      if (std::isfinite(t.y[i]))
        out << "<circle cx=\"" << num(px(i)) << "\" cy=\"" << num(py(t.y[i])) << "\" r=\"2.2\" fill=\""
            << t.color << "\"/>\n";
    const double ly = y_offset + kMarginTop + 14 + 14 * static_cast<double>(ti);
    out << "<rect x=\"" << num(kMarginLeft + pw - 150) << "\" y=\"" << num(ly - 9)
        << "\" width=\"10\" height=\"10\" fill=\"" << t.color << "\"/>"
        << "<text x=\"" << num(kMarginLeft + pw - 134) << "\" y=\"" << num(ly)
        << "\" font-size=\"11\">" << escape(t.label) << "</text>\n";
  }
  if (!traces.empty())
    for (std::size_t i : opt.highlights)
      if (i < traces.front().y.size() && std::isfinite(traces.front().y[i]))
        out << "<circle cx=\"" << num(px(i)) << "\" cy=\"" << num(py(traces.front().y[i]))
            << "\" r=\"6\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
}

}  // namespace

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
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

void write_stacked(std::ostream& out,
                   const std::vector<std::pair<std::vector<Trace>, ChartOptions>>& charts) {
  double width = 0, height = 0;
  for (const auto& [traces, opt] : charts) {
    width = std::max(width, opt.width);
    height += opt.height;
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height)
      << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  double offset = 0;
  for (const auto& [traces, opt] : charts) {
    chart_body(out, traces, opt, offset);
    offset += opt.height;
  }
  out << "</svg>\n";
}

void write_chart(std::ostream& out, const std::vector<Trace>& traces, const ChartOptions& options) {
  write_stacked(out, {{traces, options}});
}

}  // namespace evotrack::svg
