#pragma once

// CSV matrix/vector I/O. Locale-independent: '.' decimal point, comma
// separators, values written with max_digits10 so loads round-trip
// bit-exactly.

#include <Eigen/Dense>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

namespace fsbl {

inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                               std::chars_format::general,
                               std::numeric_limits<double>::max_digits10);
  return std::string(buf, p);
}

inline double parse_double(const std::string& tok, std::size_t line_no) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t' ||
                          *(last - 1) == '\r')) {
    --last;
  }
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last) {
    throw std::runtime_error("CSV parse error at line " +
                             std::to_string(line_no) + ": '" + tok + "'");
  }
  return v;
}

inline void write_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

inline Eigen::MatrixXd read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path);
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      row.push_back(parse_double(tok, line_no));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("CSV parse error at line " +
                               std::to_string(line_no) +
                               ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    return Eigen::MatrixXd(0, 0);
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
  }
  return m;
}

}  // namespace fsbl
