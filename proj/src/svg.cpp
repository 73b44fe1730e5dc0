#include "tempest/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "tempest/errors.hpp"

namespace tempest {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 56.0;

const char* kPalette[] = {"#1f6fb2", "#d1495b", "#2e8b57", "#8a5fbf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Scale {
  double lo, hi, a, b;  // screen = a * value + b

  Scale(double lo_, double hi_, double s0, double s1) : lo(lo_), hi(hi_) {
    if (hi == lo) hi = lo + 1.0;
    a = (s1 - s0) / (hi - lo);
    b = s0 - a * lo;
  }
  double operator()(double v) const { return a * v + b; }
};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::ofstream open_svg(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out;
}

void axes(std::ofstream& out, const std::string& title, const std::string& x_label,
          const std::string& y_label, const Scale& sx, const Scale& sy) {
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
      << "font-family=\"sans-serif\">" << escape(title) << "</text>\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\""
      << kWidth - kMarginRight << "\" y2=\"" << kHeight - kMarginBottom
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\"" << kMarginLeft
      << "\" y2=\"" << kHeight - kMarginBottom << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (kMarginLeft + kWidth - kMarginRight) / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
      << escape(x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << (kMarginTop + kHeight - kMarginBottom) / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
      << "transform=\"rotate(-90 18 " << (kMarginTop + kHeight - kMarginBottom) / 2 << ")\">"
      << escape(y_label) << "</text>\n";

  for (int i = 0; i <= 5; ++i) {
    double vy = sy.lo + (sy.hi - sy.lo) * i / 5.0;
    double py = sy(vy);
    out << "<line x1=\"" << kMarginLeft - 4 << "\" y1=\"" << num(py) << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << num(vy)
        << "</text>\n";
    out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << num(py) << "\" x2=\""
        << kWidth - kMarginRight << "\" y2=\"" << num(py)
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    double vx = sx.lo + (sx.hi - sx.lo) * i / 5.0;
    double px = sx(vx);
    out << "<line x1=\"" << num(px) << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\""
        << num(px) << "\" y2=\"" << kHeight - kMarginBottom + 4 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(px) << "\" y=\"" << kHeight - kMarginBottom + 18
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << num(vx)
        << "</text>\n";
  }
}

void bounds(const std::vector<SvgSeries>& series, double& x_lo, double& x_hi, double& y_lo,
            double& y_hi) {
  x_lo = y_lo = std::numeric_limits<double>::infinity();
  x_hi = y_hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!(x_lo <= x_hi)) {
    x_lo = 0;
    x_hi = 1;
    y_lo = 0;
    y_hi = 1;
  }
  double pad = (y_hi - y_lo) * 0.08;
  if (pad == 0.0) pad = 0.5;
  y_lo -= pad;
  y_hi += pad;
  if (y_lo > 0.0 && y_lo < (y_hi - y_lo)) y_lo = 0.0;
}

void draw_series(std::ofstream& out, const std::vector<SvgSeries>& series, const Scale& sx,
                 const Scale& sy, bool lines) {
  std::size_t color = 0;
  double legend_y = kMarginTop + 6.0;
  for (const auto& s : series) {
    const char* stroke = kPalette[color % 4];
    ++color;
    if (lines && s.points.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.8\" points=\"";
      for (const auto& [x, y] : s.points) out << num(sx(x)) << ',' << num(sy(y)) << ' ';
      out << "\"/>\n";
    }
    for (const auto& [x, y] : s.points) {
      out << "<circle cx=\"" << num(sx(x)) << "\" cy=\"" << num(sy(y))
          << "\" r=\"2.6\" fill=\"" << stroke << "\"/>\n";
    }
    if (!s.label.empty()) {
      out << "<rect x=\"" << kWidth - kMarginRight - 150 << "\" y=\"" << num(legend_y - 8)
          << "\" width=\"10\" height=\"10\" fill=\"" << stroke << "\"/>\n";
      out << "<text x=\"" << kWidth - kMarginRight - 136 << "\" y=\"" << num(legend_y + 1)
          << "\" font-size=\"11\" font-family=\"sans-serif\">" << escape(s.label) << "</text>\n";
      legend_y += 16.0;
    }
  }
}

}  // namespace

void write_line_chart(const std::filesystem::path& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<SvgSeries>& series) {
  double x_lo, x_hi, y_lo, y_hi;
  bounds(series, x_lo, x_hi, y_lo, y_hi);
  Scale sx(x_lo, x_hi, kMarginLeft, kWidth - kMarginRight);
  Scale sy(y_lo, y_hi, kHeight - kMarginBottom, kMarginTop);
  auto out = open_svg(path);
  axes(out, title, x_label, y_label, sx, sy);
  draw_series(out, series, sx, sy, true);
  out << "</svg>\n";
  if (!out) throw IoError("failed writing " + path.string());
}

void write_scatter_chart(const std::filesystem::path& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<SvgSeries>& series) {
  double x_lo, x_hi, y_lo, y_hi;
  bounds(series, x_lo, x_hi, y_lo, y_hi);
  Scale sx(x_lo, x_hi, kMarginLeft, kWidth - kMarginRight);
  Scale sy(y_lo, y_hi, kHeight - kMarginBottom, kMarginTop);
  auto out = open_svg(path);
  axes(out, title, x_label, y_label, sx, sy);
  draw_series(out, series, sx, sy, false);
  out << "</svg>\n";
  if (!out) throw IoError("failed writing " + path.string());
}

void write_bar_chart(const std::filesystem::path& path, const std::string& title,
                     const std::string& y_label,
                     const std::vector<std::pair<std::string, double>>& bars) {
  double y_hi = 0.0;
  for (const auto& [label, v] : bars) y_hi = std::max(y_hi, v);
  if (y_hi == 0.0) y_hi = 1.0;
  y_hi *= 1.1;
  Scale sy(0.0, y_hi, kHeight - kMarginBottom, kMarginTop);
  Scale sx(0.0, static_cast<double>(bars.size()), kMarginLeft, kWidth - kMarginRight);

  auto out = open_svg(path);
  axes(out, title, "", y_label, sx, sy);
  double slot = (kWidth - kMarginLeft - kMarginRight) / std::max<std::size_t>(bars.size(), 1);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    double x = kMarginLeft + slot * static_cast<double>(i) + slot * 0.15;
    double w = slot * 0.7;
    double y = sy(bars[i].second);
    const char* fill = kPalette[i % 2];
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
        << "\" height=\"" << num(kHeight - kMarginBottom - y) << "\" fill=\"" << fill << "\"/>\n";
    out << "<text x=\"" << num(x + w / 2) << "\" y=\"" << kHeight - kMarginBottom + 18
        << "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">"
        << escape(bars[i].first) << "</text>\n";
    out << "<text x=\"" << num(x + w / 2) << "\" y=\"" << num(y - 4)
        << "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">"
        << num(bars[i].second) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("failed writing " + path.string());
}

void write_histogram_chart(const std::filesystem::path& path, const std::string& title,
                           const std::array<long long, 12>& counts) {
  std::vector<std::pair<std::string, double>> bars;
  for (int i = 0; i < 12; ++i) {
    std::string label = "(" + std::to_string(i - 6) + "," + std::to_string(i - 5) + "]";
    bars.emplace_back(label, static_cast<double>(counts[static_cast<std::size_t>(i)]));
  }
  write_bar_chart(path, title, "count", bars);
}

}  // namespace tempest
