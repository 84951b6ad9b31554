#pragma once

// Triplet-method accuracy estimation for conditionally independent labeling
// functions. For three LFs i, j, k with a = E[lambda * y],
//   E[l_i l_j] = a_i a_j   =>   |a_i| = sqrt(E[l_i l_j] E[l_i l_k] / E[l_j l_k]).
// Every unordered triplet contributes one value per member; the per-LF
// magnitude is the median (or mean) of its values. Signs are resolved once per
// LF from agreement with the majority vote.

#include "sbm/core.hpp"

#include <array>
#include <optional>
#include <vector>

namespace sbm::estimate {

// Triplets whose denominator moment has magnitude at or below this are skipped.
inline constexpr double kPairEpsilon = 1e-3;

struct TripletRecord {
  std::array<int, 3> indices{};
  // Per-member clamped magnitude; nullopt where that member's denominator is
  // degenerate or a moment is undefined.
  std::array<std::optional<double>, 3> raw_estimates{};
  bool degenerate = false;  // some pairwise moment has |E| <= kPairEpsilon or is undefined
};

struct TripletResult {
  Vector accuracies;  // signed, length m
  Vector magnitudes;  // before sign resolution
  std::vector<TripletRecord> records;
  Aggregation aggregation = Aggregation::median;
};

// Mean of l_i * l_j over rows where both vote; nullopt if no such row exists.
std::optional<double> pairwise_moment(const WeakLabelMatrix& wl, Eigen::Index i, Eigen::Index j);

// Same, but from a precomputed (possibly population) moment table: the
// estimator only ever touches second moments, so tests can feed exact values.
using MomentTable = std::vector<std::vector<std::optional<double>>>;
MomentTable moment_table(const WeakLabelMatrix& wl);

TripletResult triplet_from_moments(const MomentTable& moments, Aggregation agg = Aggregation::median);

// Full procedure on votes: magnitudes from triplets, then resolve_sign.
TripletResult triplet_accuracies(const WeakLabelMatrix& wl, Aggregation agg = Aggregation::median);

// Majority vote per row (sum of non-abstaining votes); ties give 0.
IntVector majority_vote(const WeakLabelMatrix& wl);

// Signs from mean agreement with the majority vote (tie rows contribute 0);
// all-negative outcomes are flipped as a whole.
Vector resolve_sign(const Vector& magnitudes, const WeakLabelMatrix& wl);

// m x 2 matrix of per-group accuracies; triplet estimation runs separately on
// each group's rows.
Matrix per_group_accuracies(const WeakLabelMatrix& wl, const IntVector& groups,
                            Aggregation agg = Aggregation::median);

AccuracyEstimate estimate_accuracies(const WeakLabelMatrix& wl, const IntVector& groups,
                                     Aggregation agg = Aggregation::median);

}  // namespace sbm::estimate
