#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using VoteMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::VectorXi;

// Bad or inconsistent user input (CLI exit code 1).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine could not produce a valid result (CLI exit code 2).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kAbstain = 0;
inline constexpr int kNumGroups = 2;

// n x m matrix of labeling-function votes in {-1, 0, +1}; 0 is an abstain.
// Entries are not checked on construction so that validate_dataset can report
// every bad cell; operations that consume votes call require_valid first.
struct WeakLabelMatrix {
  VoteMatrix votes;

  WeakLabelMatrix() = default;
  explicit WeakLabelMatrix(VoteMatrix v) : votes(std::move(v)) {}

  Eigen::Index n() const { return votes.rows(); }
  Eigen::Index m() const { return votes.cols(); }
  int operator()(Eigen::Index row, Eigen::Index lf) const { return votes(row, lf); }

  WeakLabelMatrix select_rows(const std::vector<Eigen::Index>& rows) const;
};

struct GroupedDataset {
  Matrix features;             // n x d
  IntVector groups;            // n, entries in {0, 1}
  std::optional<IntVector> labels;  // n, entries in {-1, +1}

  Eigen::Index n() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }

  std::vector<Eigen::Index> rows_of_group(int group) const;
  Matrix group_features(int group) const;
  // Copy with the gold labels stripped; estimation and transport only ever see this.
  GroupedDataset without_labels() const;
};

enum class Aggregation { median, mean };

struct AccuracyEstimate {
  Vector per_lf_global;  // m, signed accuracies in [-1, 1]
  Matrix per_lf_group;   // m x 2
  Aggregation aggregation = Aggregation::median;
};

enum class OtType { none, linear, sinkhorn };
enum class TransportScope { per_lf, global };
enum class CostScaling { median, raw };

struct PipelineConfig {
  OtType ot_type = OtType::linear;
  int knn_k = 1;
  double sinkhorn_eta = 1.0;
  int sinkhorn_max_iter = 10;
  double sinkhorn_tol = 1e-9;
  CostScaling sinkhorn_cost = CostScaling::median;
  double covariance_ridge = 1e-6;
  TransportScope transport_scope = TransportScope::per_lf;
  double class_balance = 0.5;
  double tie_tol = 0.01;
  std::uint64_t seed = 0;
  bool end_model = true;
  int epochs = 500;
  double lr = 0.5;
  double l2 = 1e-4;
  bool hard_labels = false;  // train the end model on signs instead of probabilities
  Aggregation aggregation = Aggregation::median;
  // Skip the transport stage entirely; pseudolabels come from the raw votes.
  bool passthrough = false;
};

std::string to_string(OtType t);
std::string to_string(TransportScope s);
std::string to_string(Aggregation a);
OtType parse_ot_type(const std::string& s);
TransportScope parse_transport_scope(const std::string& s);

struct Violation {
  std::string what;
};

// Report-style check of dataset/vote consistency. Empty result means valid.
std::vector<Violation> validate_dataset(const GroupedDataset& ds, const WeakLabelMatrix& wl);
std::vector<Violation> validate_votes(const WeakLabelMatrix& wl);

// Throw InputError listing the violations, if any.
void require_valid(const GroupedDataset& ds, const WeakLabelMatrix& wl);
void require_valid(const WeakLabelMatrix& wl);

// Seed for the index-th independent stream derived from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace sbm
