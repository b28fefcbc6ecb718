#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fsbl {

/// Raised when an adaptive integration run exhausts its subdivision
/// budget. Carries the best available estimate and its error bound.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_estimate,
                   double error_bound)
      : std::runtime_error(what),
        best_estimate_(best_estimate),
        error_bound_(error_bound) {}

  double best_estimate() const { return best_estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  double best_estimate_;
  double error_bound_;
};

/// Raised when an integrand or section function produces NaN/Inf.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, double at_x)
      : std::runtime_error(what), at_x_(at_x) {}

  double at_x() const { return at_x_; }

 private:
  double at_x_;
};

/// Raised when an active-set linear system is numerically singular.
class IllConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the generic likelihood maximizer finds more than one
/// strict local maximum on its scan grid.
class AmbiguousMaximumError : public std::runtime_error {
 public:
  AmbiguousMaximumError(const std::string& what, std::vector<double> maxima)
      : std::runtime_error(what), maxima_(std::move(maxima)) {}

  const std::vector<double>& local_maxima() const { return maxima_; }

 private:
  std::vector<double> maxima_;
};

}  // namespace fsbl
