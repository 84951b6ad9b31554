#pragma once

// Generative model behind the theory: latent z, observed x = g_k(z) for group
// k, and a labeling function whose agreement with y decays with distance from
// a high-accuracy center,
//   P(lambda(x) = y) = sigmoid(2 * theta0 * phi(x, center)),
//   phi(x, c) = 1 / (1 + ||x - c||).

#include "sbm/core.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sbm::synthetic {

struct AffineMap {
  Matrix linear;
  Vector offset;

  static AffineMap identity(Eigen::Index d);
  static AffineMap translation(const Vector& offset);
  Matrix apply(const Matrix& Z) const;  // rows are points
  // h = g^{-1}; throws InputError if the linear part is singular.
  AffineMap inverse() const;
};

struct SyntheticModel {
  double theta0 = 1.0;
  Vector center;          // high-accuracy regime of the group-0 labeler
  Vector latent_mean;     // z ~ N(latent_mean, latent_cov)
  Matrix latent_cov;
  std::array<AffineMap, kNumGroups> group_transforms;
  double label_balance = 0.5;  // P(y = +1) when labels do not depend on z
  // When set, y = sign(<label_direction, z - latent_mean> + label_offset), ties +1.
  std::optional<Vector> label_direction;
  double label_offset = 0.0;
  double group1_fraction = 0.5;

  Eigen::Index dim() const { return center.size(); }

  // Standard Gaussian latent in d dimensions, identity transforms, center at 0.
  static SyntheticModel standard(Eigen::Index d, double theta0);
};

double phi(const Vector& x, const Vector& center);
double accuracy_prob(const Vector& x, const SyntheticModel& model);
Vector accuracy_prob_rows(const Matrix& X, const SyntheticModel& model);

struct SyntheticSample {
  GroupedDataset ds;   // features x = g_k(z), groups, labels y
  WeakLabelMatrix wl;  // column 0 is the distance-dependent labeler; then constant-accuracy LFs
  Matrix latent;       // z
};

Matrix sample_latent(const SyntheticModel& model, Eigen::Index n, std::uint64_t seed);

// The first round(n * (1 - group1_fraction)) rows are group 0, the rest group 1.
// extra_lf_accuracy appends conditionally independent LFs with P(lambda = y)
// constant in x.
SyntheticSample sample_labeled(const SyntheticModel& model, Eigen::Index n, std::uint64_t seed,
                               const std::vector<double>& extra_lf_accuracy = {});

struct TheoremReport {
  std::string name;
  std::vector<double> sweep_values;
  std::vector<double> measured;
  std::vector<double> bound_or_limit;
  std::vector<double> std_error;
  std::map<std::string, std::vector<double>> diagnostics;
  bool passed = false;
};

struct Theorem1Options {
  Eigen::Index n = 100000;
  std::uint64_t seed = 0;
  double monotone_slack = 0.01;
  double limit_tol = 0.02;
};

// Group 1 = group 0 translated by D along the first axis, for each D in
// shifts. measured = mean accuracy_prob over group-1 points; the sampled
// agreement rate is logged as the "sampled" diagnostic.
TheoremReport theorem1_sweep(const SyntheticModel& model, const std::vector<double>& shifts,
                             const Theorem1Options& opt = {});

struct LipschitzResult {
  double theta0 = 0.0;
  double max_ratio = 0.0;
  double bound = 0.0;  // 4 * theta0
  long pairs = 0;
  long violations = 0;
  bool passed = false;
};

// Random point pairs (half spread around the center, half infinitesimally
// close); reports the largest |dP| / ||dx||.
LipschitzResult lipschitz_check(const SyntheticModel& model, long trials, std::uint64_t seed);

struct Theorem2Options {
  Eigen::Index n_eval = 20000;
  std::uint64_t seed = 0;
  double ridge = 0.0;
  // Fit the estimated map from population moments instead of samples.
  bool analytic_moments = false;
};

// For each n: fit h_hat from n samples per group, then on held-out latents
// compare gap = |E P(lambda(z)=y) - E P(lambda(h_hat(g1(z)))=y)| against
// rhs = 4 theta0 E||h(x') - h_hat(x')||, with h = g1^{-1}.
// measured = gap, bound_or_limit = rhs.
TheoremReport theorem2_sweep(const SyntheticModel& model, const std::vector<Eigen::Index>& sample_sizes,
                             const Theorem2Options& opt = {});

}  // namespace sbm::synthetic
