#pragma once

#include "sbm/core.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sbm::metrics {

// Predictions may contain 0 (abstain); an abstain is never a positive
// prediction and never counts as correct.
struct FairnessReport {
  double accuracy = 0.0;
  double f1 = 0.0;
  double dp_gap = 0.0;            // |P(pred=1|A=1) - P(pred=1|A=0)|
  std::optional<double> eo_gap;   // |P(pred=1|Y=1,A=1) - P(pred=1|Y=1,A=0)|; nullopt if a group has no positives
  std::array<double, kNumGroups> per_group_accuracy{};
  std::array<double, kNumGroups> positive_rate_per_group{};
};

FairnessReport fairness_report(const IntVector& pred, const IntVector& gold, const IntVector& groups);

double f1_score(const IntVector& pred, const IntVector& gold);

struct MetricDelta {
  double accuracy = 0.0;
  double f1 = 0.0;
  double dp_gap = 0.0;
  std::optional<double> eo_gap;  // nullopt if either side is undefined
};

struct LfDeltaRow {
  std::string name;
  FairnessReport before;
  FairnessReport after;
  MetricDelta delta;  // after - before
};

MetricDelta difference(const FairnessReport& after, const FairnessReport& before);

std::vector<LfDeltaRow> lf_delta_report(const WeakLabelMatrix& before, const WeakLabelMatrix& after,
                                        const IntVector& gold, const IntVector& groups,
                                        const std::vector<std::string>& names = {});

struct RegimeProfile {
  Eigen::Index center_index = 0;
  double center_accuracy = 0.0;
  // Per group: (farthest included distance, cumulative accuracy).
  std::array<std::vector<std::pair<double, double>>, kNumGroups> curve;
};

// Picks the candidate whose nearest neighborhood_frac of all points is most
// accurate (first candidate wins ties), then grows each group's included set
// by step_frac of that group, ordered by distance to the chosen center.
RegimeProfile regime_profile(const Matrix& X, const std::vector<bool>& correct_mask, const IntVector& groups,
                             const std::vector<Eigen::Index>& candidate_centers, double neighborhood_frac = 0.10,
                             double step_frac = 0.02);

}  // namespace sbm::metrics
