#pragma once

// Scale-family weight priors p(x; gamma) = sqrt(gamma) * p(sqrt(gamma) x; 1).
// Every family is standardized to unit variance at construction, so the
// variance of p(.; gamma) is exactly 1/gamma.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsbl/errors.hpp"

namespace fsbl {

enum class PriorFamily { Gaussian, Laplace, Uniform, StudentT };

inline const char* to_string(PriorFamily f) {
  switch (f) {
    case PriorFamily::Gaussian: return "gaussian";
    case PriorFamily::Laplace: return "laplace";
    case PriorFamily::Uniform: return "uniform";
    case PriorFamily::StudentT: return "student_t";
  }
  return "?";
}

class ScaleFamilyPrior {
 public:
  static ScaleFamilyPrior gaussian() { return ScaleFamilyPrior(PriorFamily::Gaussian, 0.0); }
  static ScaleFamilyPrior laplace() { return ScaleFamilyPrior(PriorFamily::Laplace, 0.0); }
  static ScaleFamilyPrior uniform() { return ScaleFamilyPrior(PriorFamily::Uniform, 0.0); }

  // Standardized Student-t: x = sqrt((dof-2)/dof) * t_dof. The finite
  // fourth-moment assumption requires dof > 4.
  static ScaleFamilyPrior student_t(double dof) {
    if (!(dof > 4.0)) {
      throw std::invalid_argument(
          "student_t prior requires dof > 4 (finite fourth moment), got " +
          std::to_string(dof));
    }
    return ScaleFamilyPrior(PriorFamily::StudentT, dof);
  }

  static ScaleFamilyPrior from_name(const std::string& name, double dof = 0.0) {
    if (name == "gaussian") return gaussian();
    if (name == "laplace") return laplace();
    if (name == "uniform") return uniform();
    if (name == "student_t") return student_t(dof);
    throw std::invalid_argument("unknown prior family: " + name);
  }

  PriorFamily family() const { return family_; }
  double dof() const { return dof_; }

  // Standardized density p(x; 1), unit variance.
  double standardized_density(double x) const {
    using std::numbers::pi;
    switch (family_) {
      case PriorFamily::Gaussian:
        return std::exp(-0.5 * x * x) / std::sqrt(2.0 * pi);
      case PriorFamily::Laplace: {
        const double b = 1.0 / std::sqrt(2.0);
        return std::exp(-std::abs(x) / b) / (2.0 * b);
      }
      case PriorFamily::Uniform: {
        const double h = std::sqrt(3.0);
        return std::abs(x) <= h ? 1.0 / (2.0 * h) : 0.0;
      }
      case PriorFamily::StudentT: {
        const double s = std::sqrt((dof_ - 2.0) / dof_);
        const double u = x / s;
        return std::exp(t_log_norm_ - 0.5 * (dof_ + 1.0) *
                                          std::log1p(u * u / dof_)) /
               s;
      }
    }
    return 0.0;
  }

  double density(double x, double gamma) const {
    if (!(gamma > 0.0)) {
      throw std::domain_error("prior density requires gamma > 0, got " +
                              std::to_string(gamma));
    }
    const double r = std::sqrt(gamma);
    return r * standardized_density(r * x);
  }

  // Fourth moment of the standardized form, closed form per family.
  double fourth_moment() const {
    switch (family_) {
      case PriorFamily::Gaussian: return 3.0;
      case PriorFamily::Laplace: return 6.0;  // 4! * b^4 with b = 1/sqrt(2)
      case PriorFamily::Uniform: return 9.0 / 5.0;
      case PriorFamily::StudentT: return 3.0 * (dof_ - 2.0) / (dof_ - 4.0);
    }
    return 0.0;
  }

  // Half-width of the support of p(.; 1); +inf for unbounded families.
  double standardized_support_halfwidth() const {
    return family_ == PriorFamily::Uniform
               ? std::sqrt(3.0)
               : std::numeric_limits<double>::infinity();
  }

  // Integration window half-width in standard deviations such that the
  // x^4-weighted tail beyond the window is negligible even relative to
  // the fourth moment. Exponential (Laplace) and polynomial (Student-t)
  // tails need far more than the Gaussian 12 sigma.
  double tail_safe_sigmas(double requested) const {
    switch (family_) {
      case PriorFamily::Gaussian:
      case PriorFamily::Uniform:
        return requested;
      case PriorFamily::Laplace:
        return std::max(requested, 45.0);
      case PriorFamily::StudentT: {
        // tail of x^4 p beyond T is about p(T;1) T^5 / (dof - 4)
        const double tol = 1e-9 * std::max(1.0, fourth_moment());
        double T = std::max(requested, 8.0);
        while (standardized_density(T) * std::pow(T, 5.0) / (dof_ - 4.0) >
                   tol &&
               T < 1e14) {
          T *= 2.0;
        }
        return T;
      }
    }
    return requested;
  }

  // Deterministic sampling. Laplace and Uniform use the inverse CDF;
  // Gaussian uses Box-Muller; Student-t uses the exact polar transform
  // T = sqrt(dof (U^(-2/dof) - 1)) cos(2 pi V). No rejection loops.
  std::vector<double> sample(double gamma, std::size_t n,
                             std::uint64_t seed) const {
    if (!(gamma > 0.0)) {
      throw std::domain_error("sample requires gamma > 0");
    }
    std::vector<double> out;
    out.reserve(n);
    std::mt19937_64 rng(seed);
    const double scale = 1.0 / std::sqrt(gamma);
    auto u01 = [&rng]() {
      // uniform in (0, 1), endpoints excluded
      return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    };
    using std::numbers::pi;
    for (std::size_t k = 0; k < n; ++k) {
      double z = 0.0;
      switch (family_) {
        case PriorFamily::Gaussian: {
          const double u1 = u01(), u2 = u01();
          z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
          break;
        }
        case PriorFamily::Laplace: {
          const double u = u01() - 0.5;
          const double b = 1.0 / std::sqrt(2.0);
          z = -b * std::copysign(std::log1p(-2.0 * std::abs(u)), u);
          break;
        }
        case PriorFamily::Uniform:
          z = std::sqrt(3.0) * (2.0 * u01() - 1.0);
          break;
        case PriorFamily::StudentT: {
          const double u1 = u01(), u2 = u01();
          const double t = std::sqrt(dof_ * (std::pow(u1, -2.0 / dof_) - 1.0)) *
                           std::cos(2.0 * pi * u2);
          z = std::sqrt((dof_ - 2.0) / dof_) * t;
          break;
        }
      }
      out.push_back(scale * z);
    }
    return out;
  }

 private:
  ScaleFamilyPrior(PriorFamily family, double dof)
      : family_(family), dof_(dof) {
    if (family_ == PriorFamily::StudentT) {
      t_log_norm_ = std::lgamma(0.5 * (dof_ + 1.0)) -
                    std::lgamma(0.5 * dof_) -
                    0.5 * std::log(dof_ * std::numbers::pi);
    }
  }

  PriorFamily family_;
  double dof_ = 0.0;
  double t_log_norm_ = 0.0;
};

}  // namespace fsbl
