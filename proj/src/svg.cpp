#include "qpinem/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "qpinem/error.hpp"

namespace qpinem::svg {

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

std::string fixed(double v, int digits = 2) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

std::string label(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 4);
  return std::string(buf, res.ptr);
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Range {
  double lo = 0.0, hi = 1.0;
  void fix() {
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

std::string header(const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth, 0) + "\" height=\"" +
                  fixed(kHeight, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fixed(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
       "</text>\n";
  return s;
}

std::string axes(const Range& xr, const Range& yr, const std::string& xl, const std::string& yl) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::string s = "<rect x=\"" + fixed(x0) + "\" y=\"" + fixed(y1) + "\" width=\"" + fixed(x1 - x0) +
                  "\" height=\"" + fixed(y0 - y1) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 - (y0 - y1) * i / 4.0;
    s += "<text x=\"" + fixed(fx) + "\" y=\"" + fixed(y0 + 16) + "\" text-anchor=\"middle\">" +
         label(xr.lo + (xr.hi - xr.lo) * i / 4.0) + "</text>\n";
    s += "<text x=\"" + fixed(x0 - 6) + "\" y=\"" + fixed(fy + 4) + "\" text-anchor=\"end\">" +
         label(yr.lo + (yr.hi - yr.lo) * i / 4.0) + "</text>\n";
  }
  s += "<text x=\"" + fixed((x0 + x1) / 2) + "\" y=\"" + fixed(kHeight - 12) + "\" text-anchor=\"middle\">" +
       escape(xl) + "</text>\n";
  s += "<text x=\"16\" y=\"" + fixed((y0 + y1) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fixed((y0 + y1) / 2) + ")\">" + escape(yl) + "</text>\n";
  return s;
}

}  // namespace

std::string line_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  Range xr{INFINITY, -INFINITY}, yr{INFINITY, -INFINITY};
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw ConfigError("series '" + s.name + "' has mismatched x and y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xr.lo = std::min(xr.lo, s.x[i]);
      xr.hi = std::max(xr.hi, s.x[i]);
      yr.lo = std::min(yr.lo, s.y[i]);
      yr.hi = std::max(yr.hi, s.y[i]);
    }
  }
  if (!std::isfinite(xr.lo)) xr = {0.0, 1.0};
  if (!std::isfinite(yr.lo)) yr = {0.0, 1.0};
  xr.fix();
  yr.fix();
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::string out = header(title) + axes(xr, yr, x_label, y_label);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % 6];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double px = x0 + (s.x[i] - xr.lo) / (xr.hi - xr.lo) * (x1 - x0);
      const double py = y0 - (s.y[i] - yr.lo) / (yr.hi - yr.lo) * (y0 - y1);
      if (!pts.empty()) pts += ' ';
      pts += fixed(px) + "," + fixed(py);
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
           "\"/>\n";
    out += "<text x=\"" + fixed(x1 - 8) + "\" y=\"" + fixed(y1 + 16 + 14.0 * k) + "\" text-anchor=\"end\" fill=\"" +
           color + "\">" + escape(s.name) + "</text>\n";
  }
  return out + "</svg>\n";
}

std::string heatmap(const std::string& title, const std::string& x_label, const std::string& y_label,
                    const std::vector<double>& x_axis, const std::vector<double>& y_axis,
                    const Eigen::MatrixXd& values, bool diverging) {
  if (values.rows() != static_cast<Eigen::Index>(x_axis.size()) ||
      values.cols() != static_cast<Eigen::Index>(y_axis.size()) || x_axis.empty() || y_axis.empty()) {
    throw ConfigError("heatmap axes do not match the value grid");
  }
  Range xr{x_axis.front(), x_axis.back()}, yr{y_axis.front(), y_axis.back()};
  xr.fix();
  yr.fix();
  double vmin = values.minCoeff(), vmax = values.maxCoeff();
  if (diverging) {
    const double a = std::max(std::abs(vmin), std::abs(vmax));
    vmin = -a;
    vmax = a;
  }
  if (!(vmax > vmin)) vmax = vmin + 1.0;
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  const double cw = (x1 - x0) / x_axis.size(), ch = (y0 - y1) / y_axis.size();
  std::string out = header(title);
  for (std::size_t i = 0; i < x_axis.size(); ++i) {
    for (std::size_t j = 0; j < y_axis.size(); ++j) {
      const double t = (values(i, j) - vmin) / (vmax - vmin);
      int r, g, b;
      if (diverging) {
        const double u = 2.0 * t - 1.0;
        r = static_cast<int>(255 * std::min(1.0, 1.0 + std::min(u, 0.0)));
        b = static_cast<int>(255 * std::min(1.0, 1.0 - std::max(u, 0.0)));
        g = std::min(r, b);
      } else {
        r = static_cast<int>(255 * std::clamp(1.5 * t, 0.0, 1.0));
        g = static_cast<int>(255 * std::clamp(1.5 * t - 0.5, 0.0, 1.0));
        b = static_cast<int>(255 * std::clamp(3.0 * t - 2.0, 0.0, 1.0));
      }
      out += "<rect x=\"" + fixed(x0 + i * cw) + "\" y=\"" + fixed(y0 - (j + 1) * ch) + "\" width=\"" +
             fixed(cw + 0.05) + "\" height=\"" + fixed(ch + 0.05) + "\" fill=\"rgb(" + std::to_string(r) + "," +
             std::to_string(g) + "," + std::to_string(b) + ")\"/>\n";
    }
  }
  out += axes(xr, yr, x_label, y_label);
  return out + "</svg>\n";
}

}  // namespace qpinem::svg
