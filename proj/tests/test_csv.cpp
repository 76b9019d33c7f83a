#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "jointspar/csv.hpp"
#include "jointspar/matmodel.hpp"
#include "jointspar/rng.hpp"

using namespace jointspar;

TEST_CASE("write/read round trip is bit exact") {
  Rng rng(17);
  Matrix X = gaussian_matrix(7, 5, rng);
  X(0, 0) = 1e-300;
  X(1, 1) = -1e300;
  X(2, 2) = 1.0 / 3.0;
  X(3, 3) = 0.0;
  std::stringstream ss;
  write_matrix_csv(ss, X);
  Matrix Y = read_matrix_csv(ss);
  REQUIRE(Y.rows() == X.rows());
  REQUIRE(Y.cols() == X.cols());
  CHECK(X == Y);
}

TEST_CASE("doubles are written with 17 significant digits") {
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(-1.5e-8) == "-1.4999999999999999e-08");
}

TEST_CASE("no header line is emitted") {
  Matrix X(1, 2);
  X << 1, 2;
  std::stringstream ss;
  write_matrix_csv(ss, X);
  CHECK(ss.str() == "1,2\n");
}

TEST_CASE("reader accepts scientific notation, padding and CRLF") {
  std::stringstream ss("1e3, 2E-2\r\n -3.5 ,4\r\n");
  Matrix X = read_matrix_csv(ss);
  REQUIRE(X.rows() == 2);
  REQUIRE(X.cols() == 2);
  CHECK(X(0, 0) == 1000.0);
  CHECK(X(0, 1) == 0.02);
  CHECK(X(1, 0) == -3.5);
  CHECK(X(1, 1) == 4.0);
}

TEST_CASE("reader rejects malformed input") {
  auto parse = [](const std::string& s) {
    std::stringstream ss(s);
    return read_matrix_csv(ss);
  };
  CHECK_THROWS_AS(parse("1,2\n3\n"), std::invalid_argument);      // ragged
  CHECK_THROWS_AS(parse(""), std::invalid_argument);              // empty
  CHECK_THROWS_AS(parse("1,abc\n"), std::invalid_argument);       // junk
  CHECK_THROWS_AS(parse("1,\n"), std::invalid_argument);          // hole
  CHECK_THROWS_AS(parse("nan,1\n"), std::invalid_argument);       // non-finite
  CHECK_THROWS_AS(parse("inf,1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse("1 2\n"), std::invalid_argument);         // no comma
}

TEST_CASE("writer rejects non-finite entries") {
  Matrix X = Matrix::Zero(2, 2);
  X(0, 0) = std::numeric_limits<double>::quiet_NaN();
  std::stringstream ss;
  CHECK_THROWS_AS(write_matrix_csv(ss, X), std::invalid_argument);
}

TEST_CASE("file round trip") {
  Rng rng(99);
  Matrix X = gaussian_matrix(3, 3, rng);
  const std::string path = "csv_roundtrip_test.tmp";
  write_matrix_csv(path, X);
  Matrix Y = read_matrix_csv(path);
  CHECK(X == Y);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_matrix_csv("definitely_missing_dir/x.csv"),
                  std::invalid_argument);
}
