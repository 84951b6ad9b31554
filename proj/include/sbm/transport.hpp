#pragma once

// Source-bias mitigation: for each labeling function, move the group with the
// lower estimated accuracy onto the higher one and re-read its votes from the
// nearest destination points.

#include "sbm/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sbm::transport {

struct TransportDecision {
  std::optional<int> lf_index;  // nullopt in global mode ("all")
  int src_group = 0;
  int dst_group = 1;
  double acc_src = 0.0;
  double acc_dst = 0.0;
  bool skipped = false;
  std::string reason;  // "tie" or "degenerate estimate" when skipped
};

struct RelabelResult {
  WeakLabelMatrix new_votes;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> changed_mask;
  std::vector<TransportDecision> decisions;
};

// Majority vote among the k nearest rows of X_dst (Euclidean). Neighbors are
// ordered by (distance, row index). Abstaining neighbors are ignored; a tied
// majority takes the vote of the nearest non-abstaining neighbor; all-abstain
// gives an abstain.
IntVector knn_transfer(const Matrix& X_query, const Matrix& X_dst, const IntVector& votes_dst, int k);

RelabelResult sbm_transport(const GroupedDataset& ds, const WeakLabelMatrix& wl, const AccuracyEstimate& est,
                            const PipelineConfig& cfg);

}  // namespace sbm::transport
