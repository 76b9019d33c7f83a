#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace jointspar {

// Dense double-precision matrices carry everything in this library: sensing
// matrices, unknowns, measurements and reduced factors.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when a matrix that must have full column rank is numerically
/// rank-deficient. Carries the offending sigma_min/sigma_1 ratio.
class RankDeficiencyError : public std::runtime_error {
 public:
  RankDeficiencyError(const std::string& what, double sigma_ratio)
      : std::runtime_error(what), sigma_ratio_(sigma_ratio) {}

  double sigma_ratio() const { return sigma_ratio_; }

 private:
  double sigma_ratio_;
};

/// Thrown when an exhaustive-search routine is asked for a problem above its
/// configured size cap.
class SizeLimitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical routine encounters non-finite values or when every
/// attempt of a multi-attempt procedure fails.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace jointspar
