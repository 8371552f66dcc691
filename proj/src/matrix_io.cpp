#include "d2ke/matrix_io.hpp"

#include <cstdio>
#include <sstream>

#include "d2ke/errors.hpp"
#include "d2ke/io.hpp"

namespace d2ke {

std::string format_matrix(const RowMatrix& m) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

RowMatrix parse_matrix(std::string_view text) {
  std::istringstream in{std::string(text)};
  long long rows = -1, cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) throw ParseError(1, "bad matrix header");
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::string tok;
      if (!(in >> tok)) throw ParseError(static_cast<std::size_t>(i) + 2, "matrix row too short");
      m(i, j) = std::strtod(tok.c_str(), nullptr);
    }
  }
  std::string extra;
  if (in >> extra) throw DimensionMismatch("matrix has more values than its header declares");
  return m;
}

void write_matrix(const RowMatrix& m, const std::string& path) { write_file(path, format_matrix(m)); }

RowMatrix read_matrix(const std::string& path) { return parse_matrix(read_file(path)); }

}  // namespace d2ke
