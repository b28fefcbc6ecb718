#pragma once

// Fast SBL coordinate ascent over the hyperparameter vector for the
// Gaussian likelihood. Pruned columns are represented by absence from the
// active set; every update re-solves the active system in full.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "fsbl/criteria.hpp"
#include "fsbl/section.hpp"

namespace fsbl {

struct ModelState {
  std::map<Eigen::Index, double> active;  // column index -> finite gamma
  Eigen::VectorXd posterior_mean;         // over active columns, in map order
  Eigen::MatrixXd posterior_cov;          // |active| x |active|
  double log_evidence = 0.0;
};

enum class SweepOrder { cyclic, largest_gain };

struct SolverConfig {
  double kappa = 1.0;
  std::size_t max_sweeps = 1000;
  double evidence_rel_tol = 1e-8;
  SweepOrder sweep_order = SweepOrder::cyclic;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(kappa > 0.0) || !(evidence_rel_tol > 0.0)) {
      throw std::invalid_argument("solver tolerances must be positive");
    }
  }
};

enum class CoordinateAction { added, re_estimated, deleted, unchanged };

inline const char* to_string(CoordinateAction a) {
  switch (a) {
    case CoordinateAction::added: return "added";
    case CoordinateAction::re_estimated: return "re_estimated";
    case CoordinateAction::deleted: return "deleted";
    case CoordinateAction::unchanged: return "unchanged";
  }
  return "?";
}

namespace detail {

struct ActiveFactorization {
  std::vector<Eigen::Index> indices;
  Eigen::MatrixXd Aa;
  Eigen::VectorXd gammas;
  Eigen::LDLT<Eigen::MatrixXd> ldlt;  // of B = lambda Aa'Aa + diag(gamma)
  double logdet_B = 0.0;
};

inline ActiveFactorization factor_active(const SparseProblem& problem,
                                         const std::map<Eigen::Index, double>& active) {
  ActiveFactorization fac;
  const Eigen::Index k = static_cast<Eigen::Index>(active.size());
  fac.Aa.resize(problem.rows(), k);
  fac.gammas.resize(k);
  Eigen::Index c = 0;
  for (const auto& [j, gamma] : active) {
    fac.indices.push_back(j);
    fac.Aa.col(c) = problem.dictionary.col(j);
    fac.gammas(c) = gamma;
    ++c;
  }
  if (k > 0) {
    Eigen::MatrixXd B = problem.noise_precision * (fac.Aa.transpose() * fac.Aa);
    B.diagonal() += fac.gammas;
    fac.ldlt.compute(B);
    const auto& d = fac.ldlt.vectorD();
    const double dmin = d.minCoeff(), dmax = d.maxCoeff();
    if (fac.ldlt.info() != Eigen::Success || !(dmin > 0.0) ||
        dmax / dmin > 1e12) {
      throw IllConditioningError("ill-conditioned active covariance");
    }
    fac.logdet_B = d.array().log().sum();
  }
  return fac;
}

}  // namespace detail

// log N(y; 0, lambda^{-1} I + Aa diag(gamma)^{-1} Aa') via the active-set
// determinant and Woodbury identities.
inline double log_evidence(const SparseProblem& problem,
                           const std::map<Eigen::Index, double>& active) {
  const double lambda = problem.noise_precision;
  const auto& y = problem.observation;
  const double N = static_cast<double>(problem.rows());
  double logdet_C = -N * std::log(lambda);
  double quad = lambda * y.squaredNorm();
  if (!active.empty()) {
    auto fac = detail::factor_active(problem, active);
    logdet_C += fac.logdet_B - fac.gammas.array().log().sum();
    const Eigen::VectorXd Aty = fac.Aa.transpose() * y;
    quad -= lambda * lambda * Aty.dot(fac.ldlt.solve(Aty));
  }
  return -0.5 * (N * std::log(2.0 * std::numbers::pi) + logdet_C + quad);
}

inline double log_evidence(const SparseProblem& problem,
                           const ModelState& state) {
  return log_evidence(problem, state.active);
}

struct Posterior {
  Eigen::VectorXd mean;                  // length M, zeros where pruned
  Eigen::MatrixXd active_covariance;     // |active| x |active|
  std::vector<Eigen::Index> active_indices;
};

inline Posterior posterior(const SparseProblem& problem,
                           const ModelState& state) {
  Posterior p;
  p.mean = Eigen::VectorXd::Zero(problem.cols());
  if (state.active.empty()) {
    p.active_covariance.resize(0, 0);
    return p;
  }
  auto fac = detail::factor_active(problem, state.active);
  const Eigen::Index k = static_cast<Eigen::Index>(fac.indices.size());
  p.active_covariance =
      fac.ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::VectorXd m = problem.noise_precision *
                            (p.active_covariance *
                             (fac.Aa.transpose() * problem.observation));
  for (Eigen::Index c = 0; c < k; ++c) {
    p.mean(fac.indices[c]) = m(c);
  }
  p.active_indices = fac.indices;
  return p;
}

inline void refresh_caches(const SparseProblem& problem, ModelState& state) {
  const auto post = posterior(problem, state);
  state.posterior_cov = post.active_covariance;
  state.posterior_mean.resize(static_cast<Eigen::Index>(state.active.size()));
  Eigen::Index c = 0;
  for (const auto& [j, gamma] : state.active) {
    state.posterior_mean(c++) = post.mean(j);
  }
  state.log_evidence = log_evidence(problem, state);
}

struct UpdateResult {
  CoordinateAction action = CoordinateAction::unchanged;
  SectionStats stats;
};

// One coordinate update: admit/re-estimate when the threshold rule fires
// and the section has a finite maximizer, prune otherwise.
inline UpdateResult update_coordinate(const SparseProblem& problem,
                                      ModelState& state, Eigen::Index i,
                                      const SolverConfig& config = {}) {
  config.validate();
  auto others = state.active;
  others.erase(i);
  UpdateResult res;
  res.stats = compute_section_stats(problem, others, i);
  const bool was_active = state.active.count(i) > 0;

  const bool admit = kappa_pruning_rule(res.stats, config.kappa);
  const double excess = res.stats.mu * res.stats.mu - res.stats.sigma2;
  if (admit && excess > 0.0 &&
      std::abs(res.stats.mu) >
          std::sqrt(res.stats.sigma2) * (1.0 + kBoundaryBand)) {
    const double gamma_hat = 1.0 / excess;
    state.active[i] = gamma_hat;
    res.action =
        was_active ? CoordinateAction::re_estimated : CoordinateAction::added;
  } else {
    // Either the rule rejects the component or no finite maximizer
    // exists (possible when kappa < 1 admits |mu| <= sigma).
    if (was_active) {
      state.active.erase(i);
      res.action = CoordinateAction::deleted;
    } else {
      res.action = CoordinateAction::unchanged;
    }
  }
  if (res.action != CoordinateAction::unchanged) {
    refresh_caches(problem, state);
  }
  return res;
}

struct SweepTrace {
  std::vector<double> evidence;       // after each full sweep
  std::vector<std::size_t> active_size;
};

struct SolveResult {
  ModelState state;
  SweepTrace trace;
  bool converged = false;
  std::size_t sweeps = 0;
};

inline SolveResult solve(const SparseProblem& problem,
                         const SolverConfig& config = {}) {
  problem.validate();
  config.validate();
  SolveResult out;
  out.state.log_evidence = log_evidence(problem, out.state);

  const Eigen::Index M = problem.cols();
  double prev = out.state.log_evidence;
  for (std::size_t sweep = 0; sweep < config.max_sweeps; ++sweep) {
    if (config.sweep_order == SweepOrder::cyclic) {
      for (Eigen::Index i = 0; i < M; ++i) {
        update_coordinate(problem, out.state, i, config);
      }
    } else {
      // largest_gain: M single updates, each picking the coordinate with
      // the best exact section-likelihood gain against the current state.
      for (Eigen::Index step = 0; step < M; ++step) {
        Eigen::Index best = -1;
        double best_gain = 0.0;
        for (Eigen::Index i = 0; i < M; ++i) {
          auto others = out.state.active;
          others.erase(i);
          const auto stats = compute_section_stats(problem, others, i);
          const auto it = out.state.active.find(i);
          const double cur =
              it != out.state.active.end()
                  ? section_likelihood_log_closed_form(stats, it->second)
                  : -0.5 * (stats.mu * stats.mu / stats.sigma2 +
                            std::log(2.0 * std::numbers::pi * stats.sigma2));
          double cand = cur;
          if (kappa_pruning_rule(stats, config.kappa) &&
              stats.mu * stats.mu > stats.sigma2) {
            cand = section_likelihood_log_closed_form(
                stats, 1.0 / (stats.mu * stats.mu - stats.sigma2));
          } else if (it != out.state.active.end()) {
            cand = -0.5 * (stats.mu * stats.mu / stats.sigma2 +
                           std::log(2.0 * std::numbers::pi * stats.sigma2));
          }
          const double gain = cand - cur;
          if (gain > best_gain) {
            best_gain = gain;
            best = i;
          }
        }
        if (best < 0) break;
        update_coordinate(problem, out.state, best, config);
      }
    }
    out.sweeps = sweep + 1;
    out.trace.evidence.push_back(out.state.log_evidence);
    out.trace.active_size.push_back(out.state.active.size());
    const double cur = out.state.log_evidence;
    if (std::abs(cur - prev) <=
        config.evidence_rel_tol * std::max(1.0, std::abs(cur))) {
      out.converged = true;
      break;
    }
    prev = cur;
  }
  refresh_caches(problem, out.state);
  return out;
}

}  // namespace fsbl
