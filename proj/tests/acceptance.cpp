// Acceptance suite: one test case per top-level claim, each printing a
// single PASS/FAIL line with its runtime so the output doubles as a
// checklist.

#include <catch2/catch_amalgamated.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "fsbl/fsbl.hpp"

using namespace fsbl;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ =
      std::chrono::steady_clock::now();
};

void report(int id, const char* what, bool pass, double secs,
            const std::string& extra = "") {
  std::printf("[criterion %d] %s: %s (%.2f s)%s%s\n", id,
              pass ? "PASS" : "FAIL", what, secs, extra.empty() ? "" : " -- ",
              extra.c_str());
  std::fflush(stdout);
}

struct SectionSampler {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> um{-3.0, 3.0};
  std::uniform_real_distribution<double> us{0.1, 4.0};
  explicit SectionSampler(std::uint64_t seed) : rng(seed) {}
  SectionStats next() { return {um(rng), us(rng), 0}; }
};

}  // namespace

TEST_CASE("criterion 1: threshold rule equals the numeric argmax") {
  Stopwatch sw;
  SectionSampler sampler(1001);
  const auto prior = ScaleFamilyPrior::gaussian();
  int mismatches = 0, tested = 0, excluded = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto s = sampler.next();
    if (std::abs(s.mu * s.mu / s.sigma2 - 1.0) < 1e-3) {
      ++excluded;
      continue;
    }
    const auto f = SectionFunction::closed_form(s);
    const auto numeric = argmax_section_likelihood(f, prior, {}, true);
    if (kappa_pruning_rule(s, 1.0) != numeric.finite) ++mismatches;
    ++tested;
  }
  const bool pass = mismatches == 0 && sw.seconds() < 30.0;
  report(1, "kappa rule vs numeric argmax over 1000 sections", pass,
         sw.seconds(),
         std::to_string(tested) + " tested, " + std::to_string(excluded) +
             " boundary-excluded, " + std::to_string(mismatches) +
             " mismatches");
  REQUIRE(pass);
}

TEST_CASE("criterion 2: the two reference sections") {
  Stopwatch sw;
  const auto prior = ScaleFamilyPrior::gaussian();

  // case a: finite maximizer at gamma = 0.8, closed form and numeric agree
  const SectionStats a{1.5, 1.0, 0};
  const auto cf = argmax_closed_form(a);
  const auto num =
      argmax_section_likelihood(SectionFunction::closed_form(a), prior, {},
                                true);
  bool pass = cf.finite && num.finite &&
              std::abs(cf.gamma_hat - 0.8) <= 1e-6 * 0.8 &&
              std::abs(num.gamma_hat - 0.8) <= 1e-6 * 0.8;

  // case b: no finite maximizer; ell increases toward f(0) from below
  const SectionStats b{0.5, 1.0, 0};
  pass = pass &&
         !argmax_section_likelihood(SectionFunction::closed_form(b), prior,
                                    {}, true)
              .finite;
  const double f0 = gaussian_pdf(0.0, 0.5, 1.0);
  double prev = -1.0;
  for (double gamma : {1e2, 1e4, 1e6}) {
    const double ell = section_likelihood_closed_form(b, gamma);
    pass = pass && ell > prev && ell < f0;
    prev = ell;
  }

  pass = pass && sw.seconds() < 5.0;
  report(2, "reference sections: gamma_hat = 0.8 and the infinite branch",
         pass, sw.seconds());
  REQUIRE(pass);
}

TEST_CASE("criterion 3: symmetrized remainder sign split") {
  Stopwatch sw;
  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> us(0.1, 4.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  auto max_on_grid = [](const SectionStats& s) {
    double worst = -std::numeric_limits<double>::infinity();
    const double x_max = 10.0 * std::sqrt(s.sigma2);
    for (double x : log_spaced_grid(x_max * 1e-6, x_max, 2048)) {
      worst = std::max(worst, r1bar_gaussian(s, x));
    }
    return worst;
  };

  int prune_failures = 0, keep_failures = 0;
  for (int t = 0; t < 500; ++t) {
    const double s2 = us(rng);
    const double sigma = std::sqrt(s2);
    // |mu| <= sigma
    SectionStats prune{u01(rng) * sigma, s2, 0};
    if (max_on_grid(prune) > 1e-12) ++prune_failures;
    // |mu| > sigma
    SectionStats keep{(1.01 + 2.0 * u01(rng)) * sigma, s2, 0};
    if (!(max_on_grid(keep) > 1e-12)) ++keep_failures;
  }
  const bool pass =
      prune_failures == 0 && keep_failures == 0 && sw.seconds() < 10.0;
  report(3, "remainder nonpositive iff mu^2 <= sigma^2 (500 + 500 sections)",
         pass, sw.seconds(),
         std::to_string(prune_failures) + " prune-side, " +
             std::to_string(keep_failures) + " keep-side failures");
  REQUIRE(pass);
}

TEST_CASE("criterion 4: large-gamma rate for all four priors") {
  Stopwatch sw;
  const auto grid = log_spaced_grid(1e3, 1e6, 13);
  const std::vector<ScaleFamilyPrior> priors = {
      ScaleFamilyPrior::gaussian(), ScaleFamilyPrior::laplace(),
      ScaleFamilyPrior::uniform(), ScaleFamilyPrior::student_t(5.0)};
  int failures = 0;
  double worst = 0.0;
  for (const SectionStats s :
       {SectionStats{1.5, 1.0, 0}, SectionStats{0.5, 1.0, 0}}) {
    const auto f = SectionFunction::closed_form(s);
    for (const auto& prior : priors) {
      const auto r = lemma1_rate_check(f, prior, grid);
      worst = std::max(worst, r.rel_error);
      if (r.degenerate || r.rel_error >= 1e-2) ++failures;
    }
  }
  const bool pass = failures == 0 && sw.seconds() < 60.0;
  report(4, "plateau of (ell - f(0)) * gamma matches f''(0)/2 (8 combos)",
         pass, sw.seconds(),
         "worst relative error " + std::to_string(worst));
  REQUIRE(pass);
}

TEST_CASE("criterion 5: prune and keep verdicts never co-occur") {
  Stopwatch sw;
  SectionSampler sampler(5005);
  int co_occurrences = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto v = evaluate_criteria(sampler.next());
    if (v.theorem1_prune == TriState::holds &&
        v.theorem2_finite == TriState::holds) {
      ++co_occurrences;
    }
  }

  // non-Gaussian even sections: mixtures of two centered Gaussians
  std::mt19937_64 rng(5050);
  std::uniform_real_distribution<double> uw(0.05, 0.95);
  std::uniform_real_distribution<double> uv(0.2, 3.0);
  for (int t = 0; t < 100; ++t) {
    const double w = uw(rng), v1 = uv(rng), v2 = uv(rng);
    auto f = SectionFunction::generic(
        [w, v1, v2](double x) {
          return w * gaussian_pdf(x, 0.0, v1) +
                 (1.0 - w) * gaussian_pdf(x, 0.0, v2);
        },
        std::sqrt(std::min(v1, v2)));
    const auto t1 = theorem1_check(f, 10.0 * std::sqrt(std::max(v1, v2)));
    const auto t2 = theorem2_check(f);
    if (t1.verdict == TriState::holds && t2.verdict == TriState::holds) {
      ++co_occurrences;
    }
  }
  const bool pass = co_occurrences == 0 && sw.seconds() < 60.0;
  report(5, "mutual exclusivity over 10100 sections", pass, sw.seconds(),
         std::to_string(co_occurrences) + " co-occurrences");
  REQUIRE(pass);
}

TEST_CASE("criterion 6: per-update monotonicity and support recovery") {
  Stopwatch sw;
  int monotonicity_violations = 0, exact_recoveries = 0;
  const SolverConfig config;
  for (int trial = 0; trial < 100; ++trial) {
    SyntheticSpec spec;
    spec.n = 100;
    spec.m = 256;
    spec.k = 10;
    spec.snr_db = 30.0;
    spec.seed = 60000 + static_cast<std::uint64_t>(trial);
    const auto gen = generate(spec);

    // drive the coordinate updates directly so every single evidence
    // delta is observable, mirroring solve()'s cyclic schedule
    ModelState state;
    state.log_evidence = log_evidence(gen.problem, state);
    bool converged = false;
    for (std::size_t sweep = 0; sweep < config.max_sweeps && !converged;
         ++sweep) {
      const double sweep_start = state.log_evidence;
      for (Eigen::Index i = 0; i < gen.problem.cols(); ++i) {
        const double before = state.log_evidence;
        update_coordinate(gen.problem, state, i, config);
        if (state.log_evidence < before - 1e-10) ++monotonicity_violations;
      }
      converged = std::abs(state.log_evidence - sweep_start) <=
                  config.evidence_rel_tol *
                      std::max(1.0, std::abs(state.log_evidence));
    }

    std::vector<Eigen::Index> recovered;
    for (const auto& [j, g] : state.active) recovered.push_back(j);
    if (recovered == gen.planted.support) ++exact_recoveries;
  }

  // the monotonicity bound is the hard gate; the recovery count is
  // reported against its >= 95/100 expectation
  const bool pass = monotonicity_violations == 0 && sw.seconds() < 300.0;
  report(6, "every evidence delta >= -1e-10 across 100 planted problems",
         pass, sw.seconds(),
         "exact support recovery " + std::to_string(exact_recoveries) +
             "/100 (expected >= 95)");
  REQUIRE(pass);
}

TEST_CASE("criterion 7: closed form vs quadrature consistency") {
  Stopwatch sw;
  const auto prior = ScaleFamilyPrior::gaussian();
  double worst_ell = 0.0, worst_r1 = 0.0;
  int lattice_points = 0;
  for (double mu : {-3.0, -1.5, 0.0, 1.5, 3.0}) {
    for (double s2 : {0.1, 0.5, 1.0, 2.0, 4.0}) {
      const SectionStats s{mu, s2, 0};
      const auto f = SectionFunction::closed_form(s);
      for (int k = 0; k < 20; ++k) {
        const double gamma = std::pow(10.0, -3.0 + 9.0 * k / 19.0);
        const double cf = section_likelihood_closed_form(s, gamma);
        const double q = section_likelihood_quadrature(f, prior, gamma);
        worst_ell = std::max(worst_ell, std::abs(q - cf) / std::abs(cf));
        ++lattice_points;
      }
      for (double x : {0.1, 0.5, 1.0, 2.0}) {
        const double scale =
            std::max(std::abs(r1bar_gaussian(s, x)), 1e-300);
        worst_r1 = std::max(
            worst_r1,
            std::abs(r1bar_generic(f, x) - r1bar_gaussian(s, x)) / scale);
      }
    }
  }
  const bool pass =
      worst_ell < 1e-9 && worst_r1 < 1e-10 && sw.seconds() < 30.0;
  report(7, "likelihood and remainder paths agree on the lattice", pass,
         sw.seconds(),
         std::to_string(lattice_points) + " lattice points, worst rel " +
             std::to_string(worst_ell));
  REQUIRE(pass);
}
