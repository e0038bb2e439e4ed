#include "svg.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "cec/errors.h"

namespace cec::tools {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 130.0;
constexpr double kTop = 20.0;
constexpr double kBottom = 50.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::vector<std::string> SplitRow(std::string_view line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t end = line.find(',', start);
    if (end == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, end - start));
    start = end + 1;
  }
}

double ParseNumber(const std::string& s, int row) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() ||
      !std::isfinite(v)) {
    throw InvalidArgument("csv row " + std::to_string(row) +
                          ": not a finite number: '" + s + "'");
  }
  return v;
}

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

}  // namespace

std::string emit_svg(std::string_view csv, ChartKind) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start < csv.size()) {
    size_t end = csv.find('\n', start);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw InvalidArgument("csv: missing header");
  const std::vector<std::string> header = SplitRow(lines[0]);
  int algo_col = -1;
  int y_col = -1;
  for (size_t c = 1; c < header.size(); ++c) {
    if (header[c] == "algo") {
      algo_col = static_cast<int>(c);
    } else if (header[c] != "event" && y_col < 0) {
      y_col = static_cast<int>(c);
    }
  }
  if (y_col < 0) throw InvalidArgument("csv: need an x and a y column");

  std::vector<Series> series;
  for (size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string> row = SplitRow(lines[r]);
    if (row.size() != header.size()) {
      throw InvalidArgument("csv row " + std::to_string(r) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(row.size()));
    }
    const std::string name = algo_col >= 0 ? row[algo_col] : header[y_col];
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const Series& s) { return s.name == name; });
    if (it == series.end()) {
      series.push_back({name, {}, {}});
      it = series.end() - 1;
    }
    it->x.push_back(ParseNumber(row[0], static_cast<int>(r)));
    it->y.push_back(ParseNumber(row[y_col], static_cast<int>(r)));
  }

  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  bool any = false;
  bool positive = true;
  for (const Series& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!any) {
        x_lo = x_hi = s.x[i];
        y_lo = y_hi = s.y[i];
        any = true;
      }
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
      positive = positive && s.y[i] > 0.0;
    }
  }
  // Log axis when a positive series spans more than three decades.
  const bool log_y = any && positive && y_hi / y_lo > 1e3;
  auto ty = [log_y](double v) { return log_y ? std::log10(v) : v; };
  if (log_y) {
    y_lo = std::log10(y_lo);
    y_hi = std::log10(y_hi);
  }
  if (x_hi == x_lo) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi == y_lo) {
    const double pad = std::max(0.5, std::abs(y_lo) * 0.05);
    y_lo -= pad;
    y_hi += pad;
  }
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) {
    return kTop + plot_h - (ty(y) - y_lo) / (y_hi - y_lo) * plot_h;
  };
  auto py_raw = [&](double y) {
    return kTop + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "viewBox=\"0 0 640 400\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  out += "<rect x=\"" + Fmt("%.2f", kLeft) + "\" y=\"" + Fmt("%.2f", kTop) +
         "\" width=\"" + Fmt("%.2f", plot_w) + "\" height=\"" +
         Fmt("%.2f", plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x_lo + (x_hi - x_lo) * k / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * k / 4.0;
    const std::string xp = Fmt("%.2f", px(xv));
    const std::string yp = Fmt("%.2f", py_raw(yv));
    out += "<line x1=\"" + xp + "\" y1=\"" + Fmt("%.2f", kTop + plot_h) +
           "\" x2=\"" + xp + "\" y2=\"" + Fmt("%.2f", kTop + plot_h + 4) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + xp + "\" y=\"" + Fmt("%.2f", kTop + plot_h + 16) +
           "\" text-anchor=\"middle\">" + Fmt("%.4g", xv) + "</text>\n";
    out += "<line x1=\"" + Fmt("%.2f", kLeft - 4) + "\" y1=\"" + yp +
           "\" x2=\"" + Fmt("%.2f", kLeft) + "\" y2=\"" + yp +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + Fmt("%.2f", kLeft - 6) + "\" y=\"" + yp +
           "\" text-anchor=\"end\" dominant-baseline=\"middle\">" +
           Fmt("%.4g", yv) + "</text>\n";
  }
  const std::string y_label =
      log_y ? "log10(" + header[y_col] + ")" : header[y_col];
  out += "<text x=\"" + Fmt("%.2f", kLeft + plot_w / 2) + "\" y=\"" +
         Fmt("%.2f", kHeight - 12) + "\" text-anchor=\"middle\">" +
         Escape(header[0]) + "</text>\n";
  out += "<text x=\"16\" y=\"" + Fmt("%.2f", kTop + plot_h / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         Fmt("%.2f", kTop + plot_h / 2) + ")\">" + Escape(y_label) +
         "</text>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    const Series& ser = series[s];
    const char* color = kColors[s % (sizeof kColors / sizeof kColors[0])];
    if (ser.x.size() == 1) {
      out += "<circle cx=\"" + Fmt("%.2f", px(ser.x[0])) + "\" cy=\"" +
             Fmt("%.2f", py(ser.y[0])) + "\" r=\"3\" fill=\"" + color +
             "\"/>\n";
    } else {
      out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < ser.x.size(); ++i) {
        out += (i ? " " : "") + Fmt("%.2f", px(ser.x[i])) + "," +
               Fmt("%.2f", py(ser.y[i]));
      }
      out += "\"/>\n";
    }
    const double ly = kTop + 12 + 16 * static_cast<double>(s);
    out += "<line x1=\"" + Fmt("%.2f", kWidth - kRight + 10) + "\" y1=\"" +
           Fmt("%.2f", ly) + "\" x2=\"" + Fmt("%.2f", kWidth - kRight + 30) +
           "\" y2=\"" + Fmt("%.2f", ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + Fmt("%.2f", kWidth - kRight + 34) + "\" y=\"" +
           Fmt("%.2f", ly) + "\" dominant-baseline=\"middle\">" +
           Escape(ser.name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace cec::tools
