#pragma once

// CSV exchange format for complex matrices.
//
// Line 1:        <rows>,<cols>
// Lines 2..1+rows: row-major entries as re,im pairs, so 2*cols fields per line.
// Numbers are written with max_digits10 so a write/read round trip is exact.

#include <edh/types.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

namespace edh {

inline void write_matrix_csv(std::ostream& os, const Eigen::MatrixXcd& m) {
  os << m.rows() << ',' << m.cols() << '\n';
  char buf[64];
  auto put = [&](double x) {
    auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general,
                           std::numeric_limits<double>::max_digits10);
    os.write(buf, r.ptr - buf);
  };
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      put(m(i, j).real());
      os << ',';
      put(m(i, j).imag());
    }
    os << '\n';
  }
}

inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXcd& m) {
  std::ofstream f(path);
  if (!f) throw edh_error("cannot open for writing: " + path);
  write_matrix_csv(f, m);
  if (!f) throw edh_error("write failed: " + path);
}

inline Eigen::MatrixXcd read_matrix_csv(std::istream& is, const std::string& name = "<stream>") {
  auto fail = [&](int line, const std::string& what) -> void {
    throw config_error("csv matrix " + name + ", line " + std::to_string(line) + ": " + what);
  };
  std::string line;
  if (!std::getline(is, line)) fail(1, "empty input");
  long rows = 0, cols = 0;
  {
    std::istringstream hs(line);
    char comma = 0;
    if (!(hs >> rows >> comma >> cols) || comma != ',' || rows < 0 || cols < 0)
      fail(1, "expected header '<rows>,<cols>', got '" + line + "'");
    std::string rest;
    if (hs >> rest) fail(1, "trailing content after header");
  }
  Eigen::MatrixXcd m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(is, line)) fail(2 + static_cast<int>(i), "unexpected end of file");
    std::istringstream ls(line);
    std::string field;
    for (long j = 0; j < 2 * cols; ++j) {
      if (!std::getline(ls, field, ','))
        fail(2 + static_cast<int>(i), "expected " + std::to_string(2 * cols) + " fields");
      size_t pos = 0;
      double v = 0;
      try {
        v = std::stod(field, &pos);
      } catch (const std::exception&) {
        fail(2 + static_cast<int>(i), "bad number '" + field + "'");
      }
      while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
      if (pos != field.size()) fail(2 + static_cast<int>(i), "bad number '" + field + "'");
      if (j % 2 == 0)
        m(i, j / 2).real(v);
      else
        m(i, j / 2).imag(v);
    }
    if (std::getline(ls, field, ','))
      fail(2 + static_cast<int>(i), "more than " + std::to_string(2 * cols) + " fields");
  }
  std::string rest;
  while (std::getline(is, rest))
    if (!rest.empty()) fail(-1, "trailing content after matrix data");
  return m;
}

inline Eigen::MatrixXcd read_matrix_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("cannot open csv matrix: " + path);
  return read_matrix_csv(f, path);
}

}  // namespace edh
