#pragma once

// Deterministic 1-D integration of prior expectations and a small
// finite-difference toolkit. Adaptive Simpson on a truncated window with
// geometric initial panels, so integrands peaked anywhere between the
// origin and the window edge are resolved.

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fsbl/errors.hpp"
#include "fsbl/priors.hpp"

namespace fsbl {

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  std::size_t max_subdivisions = 4096;
  double truncation_sigmas = 12.0;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
      throw std::invalid_argument("quadrature tolerances must be positive");
    }
    if (!(truncation_sigmas >= 8.0)) {
      throw std::invalid_argument("truncation_sigmas must be >= 8");
    }
  }
};

namespace detail {

struct AdaptiveState {
  std::size_t splits = 0;
  std::size_t budget = 0;
};

inline double checked_eval(const std::function<double(double)>& g, double x) {
  const double v = g(x);
  if (!std::isfinite(v)) {
    throw EvaluationError("integrand returned non-finite value at x = " +
                              std::to_string(x),
                          x);
  }
  return v;
}

inline double adaptive_simpson(const std::function<double(double)>& g,
                               double a, double b, double fa, double fm,
                               double fb, double whole, double tol,
                               AdaptiveState& st, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = checked_eval(g, lm), frm = checked_eval(g, rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth > 0 && std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  if (++st.splits > st.budget || depth > 60) {
    throw ConvergenceError(
        "adaptive quadrature exhausted its subdivision budget",
        left + right + delta / 15.0, std::abs(delta) / 15.0);
  }
  return adaptive_simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, st,
                          depth + 1) +
         adaptive_simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, st,
                          depth + 1);
}

inline double integrate_panel(const std::function<double(double)>& g, double a,
                              double b, double tol, AdaptiveState& st) {
  const double m = 0.5 * (a + b);
  const double fa = checked_eval(g, a);
  const double fm = checked_eval(g, m);
  const double fb = checked_eval(g, b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(g, a, b, fa, fm, fb, whole, tol, st, 0);
}

// Panel breakpoints on [-T, T], geometric toward the origin so the
// resolution near 0 matches the prior's concentration at large gamma
// while wide windows still get coverage at every scale.
inline std::vector<double> geometric_breakpoints(double T) {
  std::vector<double> pos;
  double w = T;
  for (int j = 0; j < 48 && w > T * 0x1.0p-48; ++j) {
    pos.push_back(w);
    w *= 0.5;
  }
  std::vector<double> bp;
  bp.reserve(2 * pos.size() + 1);
  for (auto it = pos.begin(); it != pos.end(); ++it) bp.push_back(-*it);
  bp.push_back(0.0);
  for (std::size_t k = pos.size(); k-- > 0;) bp.push_back(pos[k]);
  return bp;
}

}  // namespace detail

// Integrates g over [a, b] with adaptive Simpson using the given panel
// breakpoints (must start at a and end at b, strictly increasing).
inline double integrate(const std::function<double(double)>& g,
                        const std::vector<double>& breakpoints,
                        const QuadratureSpec& spec) {
  spec.validate();
  detail::AdaptiveState st;
  st.budget = spec.max_subdivisions;

  // Rough pass fixes the tolerance scale; the L1 accumulation keeps the
  // target achievable when positive and negative halves cancel.
  double rough_l1 = 0.0;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const double a = breakpoints[k], b = breakpoints[k + 1];
    const double m = 0.5 * (a + b);
    rough_l1 += std::abs(
        (b - a) / 6.0 *
        (detail::checked_eval(g, a) + 4.0 * detail::checked_eval(g, m) +
         detail::checked_eval(g, b)));
  }
  // Relative-first tolerance: integrals of any magnitude keep rel_tol
  // significant digits; abs_tol only applies when the rough pass sees a
  // flat-zero integrand.
  double tol_total = spec.rel_tol * rough_l1;
  if (!(tol_total > 0.0)) tol_total = spec.abs_tol;
  tol_total = std::max(tol_total, 1e-290);
  const double tol_panel = tol_total / static_cast<double>(breakpoints.size());

  double total = 0.0;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    total += detail::integrate_panel(g, breakpoints[k], breakpoints[k + 1],
                                     tol_panel, st);
  }
  return total;
}

// E[g(X)] with X ~ p(.; gamma). The window is truncation_sigmas prior
// standard deviations (clipped to the support for Uniform, widened for
// Student-t whose tails are polynomial).
inline double expect(const std::function<double(double)>& g,
                     const ScaleFamilyPrior& prior, double gamma,
                     const QuadratureSpec& spec = {}) {
  if (!(gamma > 0.0)) {
    throw std::domain_error("expect requires gamma > 0");
  }
  spec.validate();
  const double sd = 1.0 / std::sqrt(gamma);
  double T = prior.tail_safe_sigmas(spec.truncation_sigmas) * sd;
  T = std::min(T, prior.standardized_support_halfwidth() * sd);
  auto integrand = [&](double x) { return g(x) * prior.density(x, gamma); };
  return integrate(integrand, detail::geometric_breakpoints(T), spec);
}

struct DerivativeEstimate {
  double value = 0.0;
  double error_indicator = 0.0;  // spread between extrapolation levels
};

// Central-difference estimate of g''(0) with one Richardson level.
inline DerivativeEstimate second_derivative_at_zero(
    const std::function<double(double)>& g, double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("finite-difference step must be positive");
  }
  auto d2 = [&](double h) {
    const double num = detail::checked_eval(g, h) -
                       2.0 * detail::checked_eval(g, 0.0) +
                       detail::checked_eval(g, -h);
    return num / (h * h);
  };
  const double coarse = d2(step);
  const double fine = d2(0.5 * step);
  DerivativeEstimate est;
  est.value = (4.0 * fine - coarse) / 3.0;
  est.error_indicator = std::abs(fine - coarse);
  return est;
}

inline double default_fd_step(double characteristic_scale) {
  return 1e-4 * std::max(1.0, characteristic_scale);
}

}  // namespace fsbl
