#pragma once

#include "sbm/core.hpp"
#include "sbm/labelmodel.hpp"
#include "sbm/metrics.hpp"
#include "sbm/synthetic.hpp"
#include "sbm/transport.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sbm::pipeline {

inline constexpr const char* kVersion = "sbm 0.1.0";

struct PipelineInputs {
  GroupedDataset ds;
  WeakLabelMatrix wl;
  std::vector<std::string> lf_names;  // empty: lf_0 ... lf_{m-1}
};

struct PipelineResult {
  AccuracyEstimate estimate_before;
  AccuracyEstimate estimate_after;  // re-estimated on the repaired votes
  transport::RelabelResult relabel;
  labelmodel::Pseudolabels baseline;  // label model on the raw votes
  labelmodel::Pseudolabels pseudo;    // label model on the repaired votes
  std::optional<labelmodel::EndModel> end_model;
  std::optional<labelmodel::Prediction> end_prediction;

  bool metrics_skipped = true;  // no gold labels
  std::optional<metrics::FairnessReport> baseline_report;
  std::optional<metrics::FairnessReport> pseudo_report;
  std::optional<metrics::FairnessReport> end_report;
  std::vector<metrics::LfDeltaRow> lf_rows;
  std::optional<metrics::RegimeProfile> regime;

  std::vector<std::pair<std::string, double>> stage_ms;
};

// Stages: validate, estimate, transport, label_model, end_model, metrics.
// On error, *failed_stage (if given) names the stage and the error propagates.
PipelineResult run_in_memory(const PipelineConfig& cfg, const PipelineInputs& inputs,
                             std::string* failed_stage = nullptr);

struct RunPaths {
  std::filesystem::path features;
  std::filesystem::path votes;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> config_file;  // recorded in the manifest only
};

// Reads inputs, runs, and writes relabeled_votes.csv, pseudolabels.csv,
// fairness.json, regime_profile.csv and manifest.json into out_dir. The
// manifest is written even when a stage fails.
PipelineResult run_pipeline(const PipelineConfig& cfg, const RunPaths& paths);

struct TheoryConfig {
  std::uint64_t seed = 0;
  double theorem1_theta0 = 5.0;
  Eigen::Index theorem1_dim = 2;
  std::vector<double> theorem1_shifts = {0.0, 1.0, 10.0, 100.0, 1000.0};
  Eigen::Index theorem1_n = 100000;
  std::vector<double> lipschitz_theta0 = {0.5, 1.0, 3.0};
  Eigen::Index lipschitz_dim = 3;
  long lipschitz_pairs = 100000;
  double theorem2_theta0 = 1.0;
  Eigen::Index theorem2_dim = 4;
  std::vector<Eigen::Index> theorem2_sizes = {100, 1000, 10000};
  Eigen::Index theorem2_eval = 20000;
};

// Fixed invertible affine g_1 used by the default Theorem 2 run.
synthetic::SyntheticModel theorem2_model(Eigen::Index d, double theta0);

struct TheoryResult {
  synthetic::TheoremReport theorem1;
  synthetic::TheoremReport theorem2;
  std::vector<synthetic::LipschitzResult> lipschitz;
  bool all_passed = false;
};

TheoryResult run_theory_suite(const TheoryConfig& cfg);
// theory.json plus theorem1_sweep.csv and theorem2_sweep.csv.
void write_theory_outputs(const TheoryResult& result, const std::filesystem::path& out_dir);
std::string theory_json(const TheoryResult& result);

}  // namespace sbm::pipeline
