#pragma once

#include <iosfwd>
#include <string>

#include "jointspar/common.hpp"

namespace jointspar {

// Plain numeric CSV: one matrix row per line, comma-separated, no header.
// Values are written with 17 significant digits so a write/read round trip
// reproduces every double bit-for-bit.

void write_matrix_csv(std::ostream& os, const Matrix& X);
void write_matrix_csv(const std::string& path, const Matrix& X);

/// Parses a matrix. Accepts fixed or scientific notation and surrounding
/// whitespace; throws std::invalid_argument on ragged rows, empty input,
/// unparsable fields, or non-finite values.
Matrix read_matrix_csv(std::istream& is);
Matrix read_matrix_csv(const std::string& path);

/// Formats one double with 17 significant digits (shortest form %.17g gives).
std::string format_double(double v);

}  // namespace jointspar
