#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace testing {

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// A report as written by the CLI: comment lines, a header, data rows.
struct Csv {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::runtime_error("no column " + name);
  }
  double at(std::size_t row, const std::string& name) const { return std::stod(rows.at(row).at(col(name))); }
  /// Text after "# key: ", empty when absent.
  std::string note(const std::string& key) const {
    const std::string prefix = "# " + key + ": ";
    for (const auto& c : comments)
      if (c.rfind(prefix, 0) == 0) return c.substr(prefix.size());
    return {};
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

inline Csv read_csv(const std::filesystem::path& p) {
  Csv csv;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0)
      csv.comments.push_back(line);
    else if (csv.header.empty())
      csv.header = split_csv_line(line);
    else
      csv.rows.push_back(split_csv_line(line));
  }
  return csv;
}

/// The number following `key` in `text`; throws when key is absent.
inline double number_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key);
  if (pos == std::string::npos) throw std::runtime_error("missing " + key);
  return std::stod(text.substr(pos + key.size()));
}

}  // namespace testing
