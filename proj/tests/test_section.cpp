#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <map>
#include <random>

#include "fsbl/priors.hpp"
#include "fsbl/section.hpp"

using namespace fsbl;

namespace {

// Dense oracle: M~i = I - lambda A~i (lambda A~i' A~i + diag(g))^{-1} A~i',
// formed explicitly at N x N.
SectionStats dense_stats_oracle(const SparseProblem& p,
                                const std::map<Eigen::Index, double>& others,
                                Eigen::Index i) {
  const Eigen::Index N = p.rows();
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(N, N);
  if (!others.empty()) {
    Eigen::MatrixXd Aa(N, static_cast<Eigen::Index>(others.size()));
    Eigen::VectorXd g(static_cast<Eigen::Index>(others.size()));
    Eigen::Index c = 0;
    for (const auto& [j, gamma] : others) {
      Aa.col(c) = p.dictionary.col(j);
      g(c) = gamma;
      ++c;
    }
    Eigen::MatrixXd B = p.noise_precision * Aa.transpose() * Aa;
    B.diagonal() += g;
    M -= p.noise_precision * Aa * B.inverse() * Aa.transpose();
  }
  SectionStats s;
  s.index = i;
  const auto ai = p.dictionary.col(i);
  s.sigma2 = 1.0 / (p.noise_precision * ai.dot(M * ai));
  s.mu = s.sigma2 * p.noise_precision * ai.dot(M * p.observation);
  return s;
}

SparseProblem random_problem(Eigen::Index N, Eigen::Index M,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  SparseProblem p;
  p.dictionary.resize(N, M);
  p.observation.resize(N);
  for (Eigen::Index r = 0; r < N; ++r) {
    p.observation(r) = nd(rng);
    for (Eigen::Index c = 0; c < M; ++c) p.dictionary(r, c) = nd(rng);
  }
  p.noise_precision = 1.0;
  return p;
}

}  // namespace

TEST_CASE("section stats: empty active set, unit column") {
  SparseProblem p;
  p.dictionary = Eigen::MatrixXd::Zero(3, 1);
  p.dictionary(0, 0) = 1.0;
  p.observation = Eigen::VectorXd::Zero(3);
  p.observation(0) = 1.0;
  p.noise_precision = 1.0;
  const auto s = compute_section_stats(p, {}, 0);
  CHECK(s.sigma2 == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(s.mu == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("section stats: orthogonal observation gives mu = 0") {
  SparseProblem p;
  p.dictionary = Eigen::MatrixXd::Zero(3, 1);
  p.dictionary(0, 0) = 1.0;
  p.observation = Eigen::VectorXd::Zero(3);
  p.observation(1) = 2.5;
  p.noise_precision = 1.0;
  const auto s = compute_section_stats(p, {}, 0);
  CHECK(s.mu == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("section stats: one active column matches dense oracle") {
  const auto p = random_problem(8, 3, 11);
  const std::map<Eigen::Index, double> others{{1, 2.0}};
  const auto fast = compute_section_stats(p, others, 0);
  const auto slow = dense_stats_oracle(p, others, 0);
  CHECK(fast.mu == Catch::Approx(slow.mu).epsilon(1e-10));
  CHECK(fast.sigma2 == Catch::Approx(slow.sigma2).epsilon(1e-10));
}

TEST_CASE("section stats: all-but-one active matches dense oracle") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto p = random_problem(12, 6, seed);
    std::map<Eigen::Index, double> others;
    std::mt19937_64 rng(seed + 100);
    std::uniform_real_distribution<double> ug(0.2, 5.0);
    for (Eigen::Index j = 1; j < 6; ++j) others[j] = ug(rng);
    const auto fast = compute_section_stats(p, others, 0);
    const auto slow = dense_stats_oracle(p, others, 0);
    CHECK(fast.mu == Catch::Approx(slow.mu).epsilon(1e-10));
    CHECK(fast.sigma2 == Catch::Approx(slow.sigma2).epsilon(1e-10));
  }
}

TEST_CASE("section stats: near-duplicate columns raise ill-conditioning") {
  auto p = random_problem(8, 3, 17);
  p.dictionary.col(1) = p.dictionary.col(2);
  std::map<Eigen::Index, double> others{{1, 1e-13}, {2, 1e-13}};
  CHECK_THROWS_AS(compute_section_stats(p, others, 0), IllConditioningError);
}

TEST_CASE("closed-form section likelihood values") {
  SectionStats s{0.0, 1.0, 0};
  CHECK(section_likelihood_closed_form(s, 1.0) ==
        Catch::Approx(1.0 / std::sqrt(4.0 * std::numbers::pi)).epsilon(1e-14));

  SectionStats a{1.5, 1.0, 0};
  // gamma -> inf limit is f(0) = N(0; 1.5, 1)
  CHECK(section_likelihood_closed_form(a, 1e15) ==
        Catch::Approx(gaussian_pdf(0.0, 1.5, 1.0)).epsilon(1e-10));
}

TEST_CASE("closed form vs quadrature") {
  const auto prior = ScaleFamilyPrior::gaussian();
  SectionStats a{1.5, 1.0, 0};
  const auto f = SectionFunction::closed_form(a);
  for (double gamma : {0.1, 0.8, 10.0}) {
    CHECK(section_likelihood_quadrature(f, prior, gamma) ==
          Catch::Approx(section_likelihood_closed_form(a, gamma))
              .epsilon(1e-9));
  }
}

TEST_CASE("quadrature likelihood approaches f(0) under laplace prior") {
  SectionStats b{0.5, 1.0, 0};
  const auto f = SectionFunction::closed_form(b);
  const double v =
      section_likelihood_quadrature(f, ScaleFamilyPrior::laplace(), 1e6);
  CHECK(v == Catch::Approx(gaussian_pdf(0.0, 0.5, 1.0)).margin(1e-4));
}

TEST_CASE("constant section has unit likelihood") {
  const auto f = SectionFunction::generic([](double) { return 1.0; });
  for (double gamma : {0.3, 4.0}) {
    CHECK(section_likelihood_quadrature(f, ScaleFamilyPrior::uniform(),
                                        gamma) ==
          Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("argmax closed form: reference cases") {
  const auto a = argmax_closed_form({1.5, 1.0, 0});
  REQUIRE(a.finite);
  CHECK(a.gamma_hat == Catch::Approx(0.8).epsilon(1e-12));

  CHECK_FALSE(argmax_closed_form({0.5, 1.0, 0}).finite);
  CHECK_FALSE(argmax_closed_form({0.0, 3.7, 0}).finite);
}

TEST_CASE("argmax numeric path agrees with closed form") {
  const auto prior = ScaleFamilyPrior::gaussian();
  const auto fa = SectionFunction::closed_form({1.5, 1.0, 0});
  const auto na = argmax_section_likelihood(fa, prior, {}, true);
  REQUIRE(na.finite);
  CHECK(na.gamma_hat == Catch::Approx(0.8).epsilon(1e-6));

  const auto fb = SectionFunction::closed_form({0.5, 1.0, 0});
  CHECK_FALSE(argmax_section_likelihood(fb, prior, {}, true).finite);
}

TEST_CASE("argmax decision invariant to positive rescaling") {
  const auto prior = ScaleFamilyPrior::gaussian();
  for (double logc : {-3.0, 0.0, 3.0}) {
    const auto f = SectionFunction::closed_form({1.5, 1.0, 0}, logc);
    const auto r = argmax_section_likelihood(f, prior, {}, true);
    REQUIRE(r.finite);
    CHECK(r.gamma_hat == Catch::Approx(0.8).epsilon(1e-6));
  }
}

TEST_CASE("closed form vs quadrature over random sections") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> um(-3.0, 3.0);
  std::uniform_real_distribution<double> us(0.1, 4.0);
  const auto prior = ScaleFamilyPrior::gaussian();
  for (int t = 0; t < 50; ++t) {
    SectionStats s{um(rng), us(rng), 0};
    const auto f = SectionFunction::closed_form(s);
    for (int k = 0; k < 10; ++k) {
      const double gamma = std::pow(10.0, -3.0 + k);
      const double cf = section_likelihood_closed_form(s, gamma);
      const double q = section_likelihood_quadrature(f, prior, gamma);
      CHECK(q == Catch::Approx(cf).epsilon(1e-9));
    }
  }
}
