#include "pdmr/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace pdmr {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("write_csv: header/column mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw std::invalid_argument("write_csv: ragged columns");
  }
  std::string text;
  for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
  text += "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) text += ",";
      text += format_number(columns[c][r]);
    }
    text += "\n";
  }
  write_text(path, text);
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& s) {
  write_csv(path, {"freq_mhz", "signal"}, {s.freq_mhz, s.signal});
}

void write_trace_csv(const std::filesystem::path& path, const RabiTrace& t) {
  write_csv(path, {"time_us", "signal"}, {t.time_us, t.signal});
}

std::pair<std::vector<double>, std::vector<double>> read_xy_csv(const std::filesystem::path& path,
                                                                const std::string& expected) {
  std::ifstream in(path);
  if (!in) throw SchemaError("csv: cannot open " + path.string());
  std::string line;
  auto strip = [](std::string& s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  };
  if (!std::getline(in, line)) throw SchemaError("csv: " + path.string() + " is empty");
  strip(line);
  if (line != expected) {
    throw SchemaError("csv: row 1: header must be '" + expected + "', got '" + line + "'");
  }
  const auto comma = expected.find(',');
  const std::string names[2] = {expected.substr(0, comma), expected.substr(comma + 1)};
  std::vector<double> x, y;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    strip(line);
    if (line.empty()) continue;
    const auto pos = line.find(',');
    if (pos == std::string::npos || line.find(',', pos + 1) != std::string::npos) {
      throw SchemaError("csv: row " + std::to_string(row) + ": expected 2 columns");
    }
    const std::string cells[2] = {line.substr(0, pos), line.substr(pos + 1)};
    double v[2];
    for (int c = 0; c < 2; ++c) {
      const char* b = cells[c].data();
      const char* e = b + cells[c].size();
      while (b < e && *b == ' ') ++b;
      const auto res = std::from_chars(b, e, v[c]);
      if (res.ec != std::errc() || res.ptr != e || !std::isfinite(v[c])) {
        throw SchemaError("csv: row " + std::to_string(row) + ", column " + names[c] +
                          ": not a finite number: '" + cells[c] + "'");
      }
    }
    x.push_back(v[0]);
    y.push_back(v[1]);
  }
  return {x, y};
}

RabiTrace read_trace_csv(const std::filesystem::path& path) {
  auto [t, y] = read_xy_csv(path, "time_us,signal");
  RabiTrace trace;
  trace.time_us = std::move(t);
  trace.signal = std::move(y);
  try {
    trace.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("csv: ") + e.what());
  }
  return trace;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) {
    t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return t;
}

}  // namespace

std::string render_svg(const Plot& plot) {
  const double w = 720, h = 440, ml = 80, mr = 20, mt = 40, mb = 60;
  auto tx = [&](double v) { return plot.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return plot.log_y ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if ((plot.log_x && !(s.x[i] > 0.0)) || (plot.log_y && !(s.y[i] > 0.0))) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double v) { return h - mb - (ty(v) - y0) / (y1 - y0) * (h - mt - mb); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << " " << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(plot.title) << "</text>\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\""
    << h - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : nice_ticks(x0, x1)) {
    const double v = plot.log_x ? std::pow(10.0, t) : t;
    const double p = px(v);
    o << "<line x1=\"" << fmt(p) << "\" y1=\"" << h - mb << "\" x2=\"" << fmt(p) << "\" y2=\""
      << h - mb + 5 << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt(p) << "\" y=\"" << h - mb + 18 << "\" text-anchor=\"middle\">"
      << tick_label(v) << "</text>\n";
  }
  for (double t : nice_ticks(y0, y1)) {
    const double v = plot.log_y ? std::pow(10.0, t) : t;
    const double p = py(v);
    o << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt(p) << "\" x2=\"" << ml << "\" y2=\""
      << fmt(p) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << ml - 8 << "\" y=\"" << fmt(p + 4) << "\" text-anchor=\"end\">"
      << tick_label(v) << "</text>\n";
  }
  o << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 18 << "\" text-anchor=\"middle\">"
    << escape(plot.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << (mt + h - mb) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label) << "</text>\n";

  double legend_y = mt + 16;
  for (const auto& s : plot.series) {
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if ((plot.log_x && !(s.x[i] > 0.0)) || (plot.log_y && !(s.y[i] > 0.0))) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (s.markers) {
        o << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i])) << "\" r=\"2\" fill=\""
          << s.color << "\"/>\n";
      } else {
        pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i])) + " ";
      }
    }
    if (!s.markers && !pts.empty()) {
      pts.pop_back();
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.width
        << "\" points=\"" << pts << "\"/>\n";
    }
    if (!s.label.empty()) {
      o << "<text x=\"" << w - mr - 8 << "\" y=\"" << legend_y << "\" text-anchor=\"end\" fill=\""
        << s.color << "\">" << escape(s.label) << "</text>\n";
      legend_y += 14;
    }
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::filesystem::path& path, const Plot& plot) { write_text(path, render_svg(plot)); }

}  // namespace pdmr
