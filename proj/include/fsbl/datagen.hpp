#pragma once

// Synthetic sparse-regression instances: unit-norm dictionary, planted
// k-sparse weights drawn from a scale-family prior, noise scaled to an
// exact SNR.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "fsbl/priors.hpp"
#include "fsbl/section.hpp"

namespace fsbl {

enum class DictionaryKind { gaussian_iid, dct_overcomplete };

struct SyntheticSpec {
  Eigen::Index n = 100;
  Eigen::Index m = 256;
  Eigen::Index k = 10;
  double snr_db = 30.0;  // +inf means noiseless
  DictionaryKind dictionary_kind = DictionaryKind::gaussian_iid;
  ScaleFamilyPrior weight_prior = ScaleFamilyPrior::gaussian();
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1 || m < 1) {
      throw std::invalid_argument("n and m must be positive");
    }
    if (k > m) {
      throw std::invalid_argument("planted sparsity k cannot exceed m");
    }
  }
};

struct PlantedRecord {
  std::vector<Eigen::Index> support;  // sorted
  Eigen::VectorXd weights;            // length m, zeros off support
  double realized_snr_db = 0.0;
  double noise_std = 0.0;
};

struct GeneratedProblem {
  SparseProblem problem;
  PlantedRecord planted;
};

inline GeneratedProblem generate(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  auto u01 = [&rng]() {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  };
  auto normal = [&]() {
    const double u1 = u01(), u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  };

  GeneratedProblem out;
  Eigen::MatrixXd A(spec.n, spec.m);
  if (spec.dictionary_kind == DictionaryKind::gaussian_iid) {
    for (Eigen::Index j = 0; j < spec.m; ++j) {
      for (Eigen::Index r = 0; r < spec.n; ++r) A(r, j) = normal();
    }
  } else {
    for (Eigen::Index j = 0; j < spec.m; ++j) {
      for (Eigen::Index r = 0; r < spec.n; ++r) {
        A(r, j) = std::cos(std::numbers::pi * (r + 0.5) * j /
                           static_cast<double>(spec.m));
      }
    }
  }
  for (Eigen::Index j = 0; j < spec.m; ++j) {
    A.col(j).normalize();
  }

  // Support: Fisher-Yates prefix of a column permutation.
  std::vector<Eigen::Index> perm(spec.m);
  for (Eigen::Index j = 0; j < spec.m; ++j) perm[j] = j;
  for (Eigen::Index j = 0; j < spec.k; ++j) {
    const auto pick =
        j + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(
                                                  spec.m - j));
    std::swap(perm[j], perm[pick]);
  }
  out.planted.support.assign(perm.begin(), perm.begin() + spec.k);
  std::sort(out.planted.support.begin(), out.planted.support.end());

  out.planted.weights = Eigen::VectorXd::Zero(spec.m);
  const auto draws = spec.weight_prior.sample(1.0, spec.k, rng());
  for (Eigen::Index j = 0; j < spec.k; ++j) {
    out.planted.weights(out.planted.support[j]) = draws[j];
  }

  const Eigen::VectorXd signal = A * out.planted.weights;
  Eigen::VectorXd noise = Eigen::VectorXd::Zero(spec.n);
  double noise_std = 0.0;
  if (std::isfinite(spec.snr_db)) {
    Eigen::VectorXd raw(spec.n);
    for (Eigen::Index r = 0; r < spec.n; ++r) raw(r) = normal();
    // Exact scaling: ||signal||^2 / ||noise||^2 = 10^(snr/10).
    const double target = std::pow(10.0, spec.snr_db / 10.0);
    const double c = std::sqrt(signal.squaredNorm() / (target * raw.squaredNorm()));
    noise = c * raw;
    noise_std = c;
    out.planted.realized_snr_db =
        10.0 * std::log10(signal.squaredNorm() / noise.squaredNorm());
  } else {
    out.planted.realized_snr_db = std::numeric_limits<double>::infinity();
  }
  out.planted.noise_std = noise_std;

  out.problem.dictionary = std::move(A);
  out.problem.observation = signal + noise;
  out.problem.noise_precision =
      noise_std > 0.0 ? 1.0 / (noise_std * noise_std) : 1e12;
  return out;
}

}  // namespace fsbl
