#pragma once

// CSV ingestion and emission. Numeric tables with an optional header
// row; empty cells read as NaN (used for censored values).

#include "vecmvn/common.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace vecmvn {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? std::string()
                                               : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  if (s == "inf" || s == "Inf") {
    out = kInf;
    return true;
  }
  if (s == "-inf" || s == "-Inf") {
    out = -kInf;
    return true;
  }
  try {
    std::size_t pos;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

}  // namespace detail

struct CsvTable {
  std::vector<std::string> header;  // empty if the file had none
  Matrix values;                    // NaN at empty cells
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open CSV file: " + path);
  std::vector<std::vector<double>> rows;
  CsvTable table;
  std::string line;
  bool first = true;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (first) {
      first = false;
      double probe;
      if (!cells.empty() && !detail::parse_double(cells[0], probe) && !cells[0].empty()) {
        table.header = cells;
        width = cells.size();
        continue;
      }
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw data_error("ragged CSV row in " + path + ": expected " +
                       std::to_string(width) + " cells");
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      double v = kNaN;
      if (!cells[c].empty() && !detail::parse_double(cells[c], v))
        throw data_error("non-numeric CSV cell '" + cells[c] + "' in " + path);
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return table;
}

// Locations file: one row per location, d numeric columns.
inline Matrix read_locations_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  if (t.values.rows() == 0) throw data_error("empty locations file: " + path);
  if (t.values.hasNaN()) throw data_error("locations file has empty cells: " + path);
  return t.values;
}

// Dense covariance: n rows x n columns.
inline Matrix read_matrix_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  if (t.values.rows() != t.values.cols())
    throw data_error("covariance CSV must be square: " + path);
  if (t.values.hasNaN()) throw data_error("covariance CSV has empty cells: " + path);
  return t.values;
}

inline void write_matrix_csv(const std::string& path, const Matrix& m,
                             const std::vector<std::string>& header = {}) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write CSV file: " + path);
  out.precision(17);
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      out << header[c] << (c + 1 < header.size() ? "," : "\n");
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out << m(r, c) << (c + 1 < m.cols() ? "," : "\n");
}

}  // namespace vecmvn
