#pragma once

// Sections of the marginal likelihood: the partly marginalized likelihood
// f_i with one weight kept, its Gaussian statistics (mu_i, sigma_i^2), and
// the per-hyperparameter likelihood ell(gamma) in closed-form and
// quadrature modes, plus the single-coordinate maximizer.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

#include "fsbl/errors.hpp"
#include "fsbl/priors.hpp"
#include "fsbl/quadrature.hpp"

namespace fsbl {

struct SparseProblem {
  Eigen::MatrixXd dictionary;   // N x M, columns a_1..a_M
  Eigen::VectorXd observation;  // length N
  double noise_precision = 1.0;

  Eigen::Index rows() const { return dictionary.rows(); }
  Eigen::Index cols() const { return dictionary.cols(); }

  void validate() const {
    if (dictionary.rows() < 1 || dictionary.cols() < 1) {
      throw std::invalid_argument("dictionary must be at least 1x1");
    }
    if (observation.size() != dictionary.rows()) {
      throw std::invalid_argument("observation length must match dictionary rows");
    }
    if (!dictionary.allFinite() || !observation.allFinite()) {
      throw std::invalid_argument("problem contains NaN/Inf entries");
    }
    if (!(noise_precision > 0.0)) {
      throw std::invalid_argument("noise precision must be positive");
    }
    for (Eigen::Index j = 0; j < dictionary.cols(); ++j) {
      if (dictionary.col(j).squaredNorm() == 0.0) {
        throw std::invalid_argument("dictionary column " + std::to_string(j) +
                                    " is zero");
      }
    }
  }
};

struct SectionStats {
  double mu = 0.0;
  double sigma2 = 1.0;
  Eigen::Index index = -1;
};

inline double gaussian_pdf(double x, double mean, double variance) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / variance) /
         std::sqrt(2.0 * std::numbers::pi * variance);
}

// f(x) up to a positive scale: either the Gaussian closed form with known
// (mu, sigma^2) or a generic evaluator.
class SectionFunction {
 public:
  static SectionFunction closed_form(SectionStats stats, double log_scale = 0.0) {
    SectionFunction f;
    f.stats_ = stats;
    f.log_scale_ = log_scale;
    return f;
  }

  static SectionFunction generic(std::function<double(double)> evaluator,
                                 double characteristic_width = 1.0) {
    SectionFunction f;
    f.evaluator_ = std::move(evaluator);
    f.width_ = characteristic_width;
    return f;
  }

  bool is_closed_form() const { return !evaluator_; }
  const SectionStats& stats() const { return *stats_; }

  double operator()(double x) const {
    double v;
    if (evaluator_) {
      v = (*evaluator_)(x);
    } else {
      v = std::exp(log_scale_) * gaussian_pdf(x, stats_->mu, stats_->sigma2);
    }
    if (!std::isfinite(v)) {
      throw EvaluationError("section function non-finite at x = " +
                                std::to_string(x),
                            x);
    }
    return v;
  }

  // Scale on which f varies: sigma for the closed form, caller-supplied
  // otherwise. Used for finite-difference steps and scan grids.
  double characteristic_width() const {
    return evaluator_ ? width_ : std::sqrt(stats_->sigma2);
  }

 private:
  SectionFunction() = default;
  std::optional<SectionStats> stats_;
  double log_scale_ = 0.0;
  std::optional<std::function<double(double)>> evaluator_;
  double width_ = 1.0;
};

// Forward declaration; full definition lives in solver.hpp.
struct ModelState;

namespace detail {

// Solves B z = rhs with B = lambda * Aa' Aa + diag(gammas) by LDLT and
// checks conditioning via the pivot spread.
inline Eigen::VectorXd solve_active_system(const Eigen::MatrixXd& Aa,
                                           const Eigen::VectorXd& gammas,
                                           double lambda,
                                           const Eigen::VectorXd& rhs,
                                           const std::string& context) {
  Eigen::MatrixXd B = lambda * (Aa.transpose() * Aa);
  B.diagonal() += gammas;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(B);
  const auto& d = ldlt.vectorD();
  const double dmin = d.minCoeff(), dmax = d.maxCoeff();
  if (ldlt.info() != Eigen::Success || !(dmin > 0.0) || dmax / dmin > 1e12) {
    throw IllConditioningError("ill-conditioned active-set system (" + context +
                               ")");
  }
  return ldlt.solve(rhs);
}

}  // namespace detail

// Section statistics for column i given the finite hyperparameters of the
// other active columns. active_others maps column index -> gamma and must
// not contain i.
inline SectionStats compute_section_stats(
    const SparseProblem& problem,
    const std::map<Eigen::Index, double>& active_others, Eigen::Index i) {
  if (i < 0 || i >= problem.cols()) {
    throw std::out_of_range("column index out of range");
  }
  const double lambda = problem.noise_precision;
  const auto ai = problem.dictionary.col(i);
  const auto& y = problem.observation;

  double at_M_a = ai.squaredNorm();
  double at_M_y = ai.dot(y);

  if (!active_others.empty()) {
    const Eigen::Index k = static_cast<Eigen::Index>(active_others.size());
    Eigen::MatrixXd Aa(problem.rows(), k);
    Eigen::VectorXd gammas(k);
    std::ostringstream ctx;
    Eigen::Index c = 0;
    for (const auto& [j, gamma] : active_others) {
      if (j == i) {
        throw std::invalid_argument("active set for section stats must exclude i");
      }
      Aa.col(c) = problem.dictionary.col(j);
      gammas(c) = gamma;
      ctx << (c ? "," : "") << j;
      ++c;
    }
    // a' M a = ||a||^2 - lambda (Aa'a)' B^{-1} (Aa'a), same for y.
    const Eigen::VectorXd Aa_ai = Aa.transpose() * ai;
    const Eigen::VectorXd Aa_y = Aa.transpose() * y;
    const Eigen::VectorXd zi = detail::solve_active_system(
        Aa, gammas, lambda, Aa_ai, "active={" + ctx.str() + "}");
    const Eigen::VectorXd zy = detail::solve_active_system(
        Aa, gammas, lambda, Aa_y, "active={" + ctx.str() + "}");
    at_M_a -= lambda * Aa_ai.dot(zi);
    at_M_y -= lambda * Aa_ai.dot(zy);
  }

  SectionStats s;
  s.index = i;
  const double denom = lambda * at_M_a;
  if (!(denom > 0.0)) {
    throw IllConditioningError("nonpositive a' M a for column " +
                               std::to_string(i));
  }
  s.sigma2 = 1.0 / denom;
  s.mu = s.sigma2 * lambda * at_M_y;
  return s;
}

// ell(gamma) for the Gaussian section up to the gamma-independent scale of
// f: the zero-mean convolution value N(0; mu, sigma^2 + 1/gamma).
inline double section_likelihood_closed_form(const SectionStats& stats,
                                             double gamma) {
  if (!(gamma > 0.0)) {
    throw std::domain_error("section likelihood requires gamma > 0");
  }
  return gaussian_pdf(0.0, stats.mu, stats.sigma2 + 1.0 / gamma);
}

inline double section_likelihood_log_closed_form(const SectionStats& stats,
                                                 double gamma) {
  const double v = stats.sigma2 + 1.0 / gamma;
  return -0.5 * (stats.mu * stats.mu / v +
                 std::log(2.0 * std::numbers::pi * v));
}

inline double section_likelihood_quadrature(const SectionFunction& f,
                                            const ScaleFamilyPrior& prior,
                                            double gamma,
                                            const QuadratureSpec& spec = {}) {
  return expect([&f](double x) { return f(x); }, prior, gamma, spec);
}

struct GammaEstimate {
  bool finite = false;
  double gamma_hat = std::numeric_limits<double>::infinity();

  static GammaEstimate finite_at(double g) { return {true, g}; }
  static GammaEstimate infinite() { return {}; }
};

// Relative tie-break band around |mu| = sigma; the closed-form maximizer
// diverges as mu^2 approaches sigma^2 from above, so ties prune.
inline constexpr double kBoundaryBand = 1e-9;

inline GammaEstimate argmax_closed_form(const SectionStats& stats) {
  const double sigma = std::sqrt(stats.sigma2);
  if (std::abs(stats.mu) <= sigma * (1.0 + kBoundaryBand)) {
    return GammaEstimate::infinite();
  }
  return GammaEstimate::finite_at(1.0 /
                                  (stats.mu * stats.mu - stats.sigma2));
}

namespace detail {

inline constexpr double kGammaLo = 1e-6;
inline constexpr double kGammaHi = 1e12;
inline constexpr int kGammaGridPoints = 97;

// Numeric maximizer of an arbitrary ell(gamma): 97-point log grid scan,
// then golden-section refinement in log space around the best interior
// point. Declares Infinite when the profile is monotone nondecreasing and
// the endpoint is within rel_tol of the supremum estimate.
inline GammaEstimate argmax_on_log_grid(
    const std::function<double(double)>& ell, double supremum_estimate,
    double rel_tol, double eval_noise_rel) {
  const double llo = std::log(kGammaLo), lhi = std::log(kGammaHi);
  std::vector<double> lg(kGammaGridPoints), val(kGammaGridPoints);
  for (int k = 0; k < kGammaGridPoints; ++k) {
    lg[k] = llo + (lhi - llo) * k / (kGammaGridPoints - 1);
    val[k] = ell(std::exp(lg[k]));
  }

  double vmax = val[0];
  for (double v : val) vmax = std::max(vmax, v);
  // Differences below the evaluation noise floor must not flip the
  // monotone/local-max classification.
  const double wiggle =
      std::max(1e-12, eval_noise_rel) * std::max(std::abs(vmax), 1.0);

  std::vector<int> local_maxima;
  for (int k = 1; k + 1 < kGammaGridPoints; ++k) {
    if (val[k] > val[k - 1] + wiggle && val[k] > val[k + 1] + wiggle) {
      local_maxima.push_back(k);
    }
  }
  if (local_maxima.size() > 1) {
    std::vector<double> where;
    for (int k : local_maxima) where.push_back(std::exp(lg[k]));
    throw AmbiguousMaximumError(
        "section likelihood has multiple local maxima on the scan grid",
        where);
  }

  bool monotone = true;
  for (int k = 1; k < kGammaGridPoints; ++k) {
    if (val[k] < val[k - 1] - wiggle) {
      monotone = false;
      break;
    }
  }
  const double sup = std::max(vmax, supremum_estimate);
  if (monotone &&
      val[kGammaGridPoints - 1] >= sup - rel_tol * std::max(std::abs(sup), 1.0)) {
    return GammaEstimate::infinite();
  }

  int best = 0;
  for (int k = 1; k < kGammaGridPoints; ++k) {
    if (val[k] > val[best]) best = k;
  }
  if (best == 0 || best == kGammaGridPoints - 1) {
    // Peak at the edge but not classified as pruning: refine against the
    // neighboring cell only.
    best = std::max(1, std::min(best, kGammaGridPoints - 2));
  }

  // Golden-section on [lg[best-1], lg[best+1]].
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lg[best - 1], b = lg[best + 1];
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = ell(std::exp(c)), fd = ell(std::exp(d));
  for (int it = 0; it < 90 && (b - a) > 1e-12; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = ell(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = ell(std::exp(d));
    }
  }
  return GammaEstimate::finite_at(std::exp(0.5 * (a + b)));
}

}  // namespace detail

// Maximizer of ell(gamma). Gaussian f with Gaussian prior uses the closed
// form; everything else goes through the numeric grid/golden-section path.
inline GammaEstimate argmax_section_likelihood(const SectionFunction& f,
                                               const ScaleFamilyPrior& prior,
                                               const QuadratureSpec& spec = {},
                                               bool force_numeric = false) {
  if (f.is_closed_form() && prior.family() == PriorFamily::Gaussian &&
      !force_numeric) {
    return argmax_closed_form(f.stats());
  }
  std::function<double(double)> ell;
  double noise_rel;
  if (f.is_closed_form() && prior.family() == PriorFamily::Gaussian) {
    // Numeric maximization path over the analytically evaluated section.
    const SectionStats stats = f.stats();
    ell = [stats](double gamma) {
      return section_likelihood_closed_form(stats, gamma);
    };
    noise_rel = 1e-14;
  } else {
    ell = [&f, &prior, &spec](double gamma) {
      return section_likelihood_quadrature(f, prior, gamma, spec);
    };
    noise_rel = 30.0 * spec.rel_tol;
  }
  return detail::argmax_on_log_grid(ell, f(0.0), spec.rel_tol * 1e4,
                                    noise_rel);
}

}  // namespace fsbl
