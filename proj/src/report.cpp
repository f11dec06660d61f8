#include "aplab/report.hpp"

#include "aplab/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aplab {

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw ValidationError("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw ValidationError("cannot rename " + tmp + " to " + path);
  }
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  // Prefer the shortest form that reads back exactly.
  for (int prec = 1; prec < 17; ++prec) {
    char shortbuf[32];
    std::snprintf(shortbuf, sizeof shortbuf, "%.*g", prec, x);
    if (std::strtod(shortbuf, nullptr) == x) return shortbuf;
  }
  return buf;
}

std::string Provenance::line() const {
  std::string out = "# provenance: command=" + command + " spec=" + (spec_hash.empty() ? "none" : spec_hash);
  for (const auto& [k, v] : knobs) out += " " + k + "=" + v;
  return out;
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw ValidationError("CsvTable: no columns");
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  for (double v : values) cells.push_back(format_number(v));
  add_row(std::move(cells));
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw ValidationError("CsvTable: row width mismatch");
  rows_.push_back(std::move(cells));
}

void CsvTable::add_note(const std::string& key, const std::string& text) { notes_.emplace_back(key, text); }

std::string CsvTable::render(const Provenance& p) const {
  std::string out = p.line() + "\n";
  for (const auto& [k, v] : notes_) out += "# " + k + ": " + v + "\n";
  auto join = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
    return line + "\n";
  };
  out += join(columns_);
  for (const auto& r : rows_) out += join(r);
  return out;
}

void CsvTable::write(const std::string& path, const Provenance& p) const {
  write_file_atomic(path, render(p));
}

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
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

bool usable(const Plot& p, double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y) || !(y > 0.0)) return false;
  return p.kind == PlotKind::semilogy || x > 0.0;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

LogLogFit plot_fit(const Plot& plot) {
  if (plot.series.empty()) return {};
  const PlotSeries& s = plot.series.front();
  const std::size_t last = std::min(plot.fit_last, s.x.size());
  std::vector<double> xs, ys;
  for (std::size_t i = plot.fit_first; i < last; ++i) {
    if (!usable(plot, s.x[i], s.y[i])) continue;
    xs.push_back(s.x[i]);
    ys.push_back(s.y[i]);
  }
  return plot.kind == PlotKind::loglog ? loglog_fit(xs, ys) : semilog_fit(xs, ys);
}

std::string render_svg(const Plot& plot) {
  const double W = 640, H = 420, left = 80, right = 20, top = 40, bottom = 60;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  auto tx = [&](double x) { return plot.kind == PlotKind::loglog ? std::log10(x) : x; };
  for (const auto& s : plot.series) {
    if (s.x.size() != s.y.size()) throw ValidationError("plot: series x and y differ in length");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(plot, s.x[i], s.y[i])) continue;
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, std::log10(s.y[i]));
      ymax = std::max(ymax, std::log10(s.y[i]));
    }
  }
  if (!(xmin <= xmax)) throw ValidationError("plot: report has no plottable points");
  if (xmax - xmin < 1e-12) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double v) { return top + (ymax - v) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << fixed(W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << escape(plot.title) << "</text>\n"
    << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw) << "\" height=\""
    << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Ticks: decades on log axes, five even steps otherwise.
  auto ticks = [](double lo, double hi, bool log_axis) {
    std::vector<double> t;
    if (log_axis && hi - lo >= 1.0) {
      for (double v = std::ceil(lo - 1e-9); v <= hi + 1e-9; v += 1.0) t.push_back(v);
    } else {
      for (int i = 0; i <= 4; ++i) t.push_back(lo + (hi - lo) * i / 4.0);
    }
    return t;
  };
  auto label = [](double v, bool log_axis) {
    char buf[32];
    if (log_axis) std::snprintf(buf, sizeof buf, "%.3g", std::pow(10.0, v));
    else std::snprintf(buf, sizeof buf, "%.3g", v);
    return std::string(buf);
  };
  const bool xlog = plot.kind == PlotKind::loglog;
  for (double v : ticks(xmin, xmax, xlog))
    o << "<line x1=\"" << fixed(px(v)) << "\" y1=\"" << fixed(top + ph) << "\" x2=\"" << fixed(px(v))
      << "\" y2=\"" << fixed(top + ph + 5) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << fixed(px(v)) << "\" y=\"" << fixed(top + ph + 18)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << escape(label(v, xlog)) << "</text>\n";
  for (double v : ticks(ymin, ymax, true))
    o << "<line x1=\"" << fixed(left - 5) << "\" y1=\"" << fixed(py(v)) << "\" x2=\"" << fixed(left) << "\" y2=\""
      << fixed(py(v)) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(py(v) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << escape(label(v, true)) << "</text>\n";
  o << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(H - 16)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape(plot.xlabel) << "</text>\n"
    << "<text x=\"18\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"13\" transform=\"rotate(-90 18 " << fixed(top + ph / 2) << ")\">" << escape(plot.ylabel) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % 6];
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(plot, s.x[i], s.y[i])) continue;
      const std::string p = fixed(px(tx(s.x[i]))) + "," + fixed(py(std::log10(s.y[i])));
      points += (points.empty() ? "" : " ") + p;
      o << "<circle cx=\"" << fixed(px(tx(s.x[i]))) << "\" cy=\"" << fixed(py(std::log10(s.y[i])))
        << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    if (!points.empty())
      o << "<polyline points=\"" << points << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    o << "<text x=\"" << fixed(left + pw - 8) << "\" y=\"" << fixed(top + 16 + 16 * static_cast<double>(k))
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">"
      << escape(s.label) << "</text>\n";
  }
  const LogLogFit fit = plot_fit(plot);
  if (fit.valid) {
    const std::size_t last = std::min(plot.fit_last, plot.series.front().x.size());
    o << "<text x=\"" << fixed(left + 8) << "\" y=\"" << fixed(top + 16)
      << "\" font-family=\"sans-serif\" font-size=\"12\">slope = " << escape(format_number(fit.slope))
      << " (points " << plot.fit_first << ".." << (last == 0 ? 0 : last - 1) << ")</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void emit_plot(const std::string& path, const Plot& plot) { write_file_atomic(path, render_svg(plot)); }

}  // namespace aplab
