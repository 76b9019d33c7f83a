#include "jointspar/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace jointspar {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(std::ostream& os, const Matrix& X) {
  require(X.allFinite(), "write_matrix_csv: non-finite entry");
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) {
      if (j) os << ',';
      os << format_double(X(i, j));
    }
    os << '\n';
  }
  if (!os) throw NumericFailure("write_matrix_csv: stream write failed");
}

void write_matrix_csv(const std::string& path, const Matrix& X) {
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("write_matrix_csv: cannot open " + path);
  write_matrix_csv(f, X);
}

Matrix read_matrix_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Skip lines that are entirely whitespace (trailing newline etc.).
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::string field = line.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos);
      std::size_t consumed = 0;
      double v;
      try {
        v = std::stod(field, &consumed);
      } catch (const std::exception&) {
        throw std::invalid_argument("read_matrix_csv: bad field '" + field + "'");
      }
      while (consumed < field.size() &&
             (field[consumed] == ' ' || field[consumed] == '\t'))
        ++consumed;
      if (consumed != field.size())
        throw std::invalid_argument("read_matrix_csv: bad field '" + field + "'");
      if (!std::isfinite(v))
        throw std::invalid_argument("read_matrix_csv: non-finite value '" + field + "'");
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("read_matrix_csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("read_matrix_csv: empty input");
  Matrix X(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < X.rows(); ++i)
    for (Index j = 0; j < X.cols(); ++j)
      X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return X;
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("read_matrix_csv: cannot open " + path);
  return read_matrix_csv(f);
}

}  // namespace jointspar
