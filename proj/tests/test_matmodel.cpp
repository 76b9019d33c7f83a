#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "jointspar/matmodel.hpp"

using namespace jointspar;

TEST_CASE("l21_norm on a fixed 3x2 matrix") {
  Matrix X(3, 2);
  X << 1, 0, 0, 2, 2, 2;
  CHECK(l21_norm(X) == doctest::Approx(3.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("l21_norm is invariant to row permutation and scales with |c|") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix X = gaussian_matrix(8, 3, rng);
    const double base = l21_norm(X);

    std::vector<Index> perm(8);
    std::iota(perm.begin(), perm.end(), Index(0));
    for (Index i = 7; i > 0; --i)
      std::swap(perm[i], perm[rng.uniform_below(static_cast<std::uint64_t>(i + 1))]);
    Matrix P = Matrix::Zero(8, 8);
    for (Index i = 0; i < 8; ++i) P(i, perm[i]) = 1.0;
    CHECK(l21_norm(P * X) == doctest::Approx(base).epsilon(1e-12));

    const double c = -3.25;
    CHECK(l21_norm(c * X) == doctest::Approx(std::abs(c) * base).epsilon(1e-12));
  }
}

TEST_CASE("row counting uses a strict threshold on row norms") {
  Matrix X = Matrix::Zero(4, 2);
  X(0, 0) = 3.0;
  X(0, 1) = 4.0;  // row norm 5
  X(2, 0) = 1e-9;
  CHECK(l0_rows(X, 1e-8) == 1);
  CHECK(l0_rows(X, 0.0) == 2);
  CHECK(l0_rows(X, 5.0) == 0);  // strictly greater than tol
  CHECK(row_support(X, 1e-8) == std::set<Index>{0});
  CHECK(row_support(X, 0.0) == std::set<Index>{0, 2});
  CHECK(default_support_tol(X) == doctest::Approx(5e-8));
}

TEST_CASE("gaussian_matrix fills row-major from the stream") {
  Rng a(77), b(77);
  Matrix X = gaussian_matrix(2, 3, a);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 3; ++j) CHECK(X(i, j) == b.normal());
}

TEST_CASE("gaussian_matrix is deterministic in the seed") {
  Rng a(123), b(123), c(124);
  Matrix X = gaussian_matrix(40, 17, a);
  Matrix Y = gaussian_matrix(40, 17, b);
  Matrix Z = gaussian_matrix(40, 17, c);
  CHECK(X == Y);
  CHECK(X != Z);
  CHECK(X.allFinite());
}

TEST_CASE("gaussian_matrix moments on a 1000x1000 draw") {
  Rng rng(2718);
  Matrix X = gaussian_matrix(1000, 1000, rng);
  const double mean = X.mean();
  const double var = (X.array() - mean).square().sum() / (X.size() - 1);
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("random_row_sparse has exactly s nonzero rows") {
  Rng rng(55);
  for (Index s : {Index(0), Index(1), Index(4), Index(10)}) {
    Matrix X = random_row_sparse(10, 3, s, rng);
    CHECK(X.rows() == 10);
    CHECK(X.cols() == 3);
    CHECK(l0_rows(X, 0.0) == s);
    // Rows in the support are fully populated (a zero entry has measure zero).
    for (Index i = 0; i < X.rows(); ++i) {
      const bool active = X.row(i).norm() > 0.0;
      for (Index j = 0; j < X.cols(); ++j)
        CHECK((X(i, j) != 0.0) == active);
    }
  }
  CHECK_THROWS_AS(random_row_sparse(5, 2, 6, rng), std::invalid_argument);
  CHECK_THROWS_AS(random_row_sparse(5, 2, -1, rng), std::invalid_argument);
}

TEST_CASE("random_row_sparse supports look uniform across rows") {
  Rng rng(606);
  std::vector<int> hits(12, 0);
  const int reps = 3000;
  for (int rep = 0; rep < reps; ++rep) {
    Matrix X = random_row_sparse(12, 1, 3, rng);
    for (Index i : row_support(X, 0.0)) ++hits[static_cast<std::size_t>(i)];
  }
  // Each row appears with probability 3/12 = 1/4.
  for (int h : hits) CHECK(std::abs(h - reps / 4) < 150);
}

TEST_CASE("make_instance stores Y exactly and is seed-deterministic") {
  ProblemInstance p = make_instance(6, 20, 4, 3, 42);
  ProblemInstance q = make_instance(6, 20, 4, 3, 42);
  ProblemInstance r = make_instance(6, 20, 4, 3, 43);
  CHECK(p.A == q.A);
  CHECK(p.X_true == q.X_true);
  CHECK(p.Y == q.Y);
  CHECK(p.A != r.A);
  CHECK(Matrix(p.A * p.X_true) == p.Y);
  CHECK(l0_rows(p.X_true, 0.0) == 3);
  CHECK(p.s == 3);
  CHECK(p.seed == 42);
}
