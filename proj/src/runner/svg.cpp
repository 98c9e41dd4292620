#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <openssl/evp.h>

#include "internal.hpp"
#include "oncovir/format.hpp"

namespace oncovir::detail {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;
constexpr const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

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

std::string num(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, 2);
  return std::string(buf, r.ptr);
}

std::string tick_label(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 4);
  return std::string(buf, r.ptr);
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  double map(double v) const { return log ? std::log10(v) : v; }
};

Axis fit_axis(const std::vector<std::vector<double>>& series, bool log) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series) {
    for (double v : s) {
      if (!std::isfinite(v) || (log && v <= 0)) continue;
      const double m = log ? std::log10(v) : v;
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  }
  if (!std::isfinite(lo)) return {0, 1, log};
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi, log};
}

std::vector<double> ticks(const Axis& a) {
  const double span = a.hi - a.lo;
  const double raw = span / 5;
  const double mag = std::pow(10, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> out;
  for (double t = std::ceil(a.lo / step) * step; t <= a.hi + 1e-9 * step; t += step) out.push_back(t);
  return out;
}

}  // namespace

std::string render_svg(const PlotSpec& spec, const Table& table) {
  const std::vector<double> x = table.column(spec.x);
  std::vector<std::vector<double>> ys;
  for (const auto& name : spec.y) ys.push_back(table.column(name));

  const Axis ax = fit_axis({x}, spec.log_x);
  const Axis ay = fit_axis(ys, spec.log_y);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (ax.map(v) - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double v) { return kTop + ph - (ay.map(v) - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(spec.title) + "</text>\n";
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : ticks(ax)) {
    const double X = kLeft + (t - ax.lo) / (ax.hi - ax.lo) * pw;
    s += "<line x1=\"" + num(X) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(X) + "\" y2=\"" +
         num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(X) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
         tick_label(ax.log ? std::pow(10, t) : t) + "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double Y = kTop + ph - (t - ay.lo) / (ay.hi - ay.lo) * ph;
    s += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(Y) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(Y) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(Y + 4) + "\" text-anchor=\"end\">" +
         tick_label(ay.log ? std::pow(10, t) : t) + "</text>\n";
  }
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 15) + "\" text-anchor=\"middle\">" +
       escape(spec.x) + "</text>\n";

  for (std::size_t k = 0; k < ys.size(); ++k) {
    const char* colour = kColours[k % std::size(kColours)];
    std::string path;
    bool pen_down = false;
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double xv = x[n], yv = ys[k][n];
      const bool ok = std::isfinite(xv) && std::isfinite(yv) && !(ax.log && xv <= 0) && !(ay.log && yv <= 0);
      if (!ok) {
        pen_down = false;
        continue;
      }
      path += (pen_down ? " L" : " M") + num(px(xv)) + " " + num(py(yv));
      pen_down = true;
    }
    s += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\"/>\n";
    const double ly = kTop + 14 + 16 * static_cast<double>(k);
    s += "<line x1=\"" + num(kLeft + pw - 120) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(kLeft + pw - 100) +
         "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(kLeft + pw - 95) + "\" y=\"" + num(ly) + "\">" + escape(spec.y[k]) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 15];
  }
  return out;
}

std::string short_number(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace oncovir::detail
