#pragma once

#include "aplab/fit.hpp"

#include <string>
#include <utility>
#include <vector>

namespace aplab {

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

/// Shortest round-trip decimal form ("%.17g"); "nan", "inf", "-inf".
std::string format_number(double x);

/// What produced a report: command, spec hash and every knob, echoed on the
/// `# provenance:` line.
struct Provenance {
  std::string command;
  std::string spec_hash;
  std::vector<std::pair<std::string, std::string>> knobs;

  void add(const std::string& key, const std::string& value) { knobs.emplace_back(key, value); }
  void add(const std::string& key, double value) { knobs.emplace_back(key, format_number(value)); }
  std::string line() const;
};

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  void add_row(const std::vector<double>& values);
  void add_row(std::vector<std::string> cells);
  /// Extra `# key: text` comment lines after the provenance line.
  void add_note(const std::string& key, const std::string& text);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }
  std::string render(const Provenance& p) const;
  void write(const std::string& path, const Provenance& p) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::pair<std::string, std::string>> notes_;
};

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

enum class PlotKind { loglog, semilogy };

struct Plot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  PlotKind kind = PlotKind::loglog;
  std::vector<PlotSeries> series;
  /// Points [first, last) of the first series enter the slope annotation.
  std::size_t fit_first = 0;
  std::size_t fit_last = static_cast<std::size_t>(-1);
};

/// Slope of the first series over the fit window: log y against log x
/// (loglog) or against x (semilogy). Invalid below two usable points.
LogLogFit plot_fit(const Plot& plot);

/// SVG 1.1 document; throws ValidationError when no series has a plottable
/// point. Byte-identical for identical input.
std::string render_svg(const Plot& plot);
void emit_plot(const std::string& path, const Plot& plot);

}  // namespace aplab
