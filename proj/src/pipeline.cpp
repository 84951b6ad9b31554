#include "sbm/pipeline.hpp"

#include "sbm/config.hpp"
#include "sbm/csv.hpp"
#include "sbm/digest.hpp"
#include "sbm/estimate.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <iostream>
#include <sstream>

namespace sbm::pipeline {

using nlohmann::json;

namespace {

class StageClock {
 public:
  StageClock(std::vector<std::pair<std::string, double>>& log, std::string* failed)
      : log_(log), failed_(failed) {}

  template <class Fn>
  void run(const std::string& stage, Fn&& fn) {
    if (failed_) *failed_ = stage;
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
    log_.emplace_back(stage, dt.count());
  }

  void done() {
    if (failed_) failed_->clear();
  }

 private:
  std::vector<std::pair<std::string, double>>& log_;
  std::string* failed_;
};

std::vector<Eigen::Index> spread_candidates(Eigen::Index n, Eigen::Index count) {
  std::vector<Eigen::Index> out;
  const Eigen::Index step = std::max<Eigen::Index>(1, n / count);
  for (Eigen::Index i = 0; i < n && static_cast<Eigen::Index>(out.size()) < count; i += step) out.push_back(i);
  return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json to_json(const metrics::FairnessReport& r) {
  return json{{"accuracy", r.accuracy},
              {"f1", r.f1},
              {"dp_gap", r.dp_gap},
              {"eo_gap", optional_number(r.eo_gap)},
              {"per_group_accuracy", {r.per_group_accuracy[0], r.per_group_accuracy[1]}},
              {"positive_rate_per_group", {r.positive_rate_per_group[0], r.positive_rate_per_group[1]}}};
}

json to_json(const metrics::MetricDelta& d) {
  return json{{"accuracy", d.accuracy}, {"f1", d.f1}, {"dp_gap", d.dp_gap}, {"eo_gap", optional_number(d.eo_gap)}};
}

json to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const std::vector<transport::TransportDecision>& decisions) {
  json out = json::array();
  for (const auto& d : decisions) {
    out.push_back({{"lf", d.lf_index ? json(*d.lf_index) : json("all")},
                   {"src_group", d.src_group},
                   {"dst_group", d.dst_group},
                   {"acc_src", d.acc_src},
                   {"acc_dst", d.acc_dst},
                   {"skipped", d.skipped},
                   {"reason", d.reason}});
  }
  return out;
}

json config_json(const PipelineConfig& cfg) {
  json out = json::object();
  std::istringstream in(config::to_kv(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    const std::string value = line.substr(eq + 1);
    const auto number = io::parse_double(value);
    if (!number)
      out[line.substr(0, eq)] = value;
    else if (value.find_first_of(".eEn") == std::string::npos)
      out[line.substr(0, eq)] = static_cast<std::int64_t>(std::stoll(value));
    else
      out[line.substr(0, eq)] = *number;
  }
  out["passthrough"] = cfg.passthrough;
  out["hard_labels"] = cfg.hard_labels;
  out["sinkhorn_cost"] = cfg.sinkhorn_cost == CostScaling::median ? "median" : "raw";
  out["aggregation"] = to_string(cfg.aggregation);
  return out;
}

std::string pseudolabels_csv(const labelmodel::Pseudolabels& p) {
  std::string out = "row,prob,label\n";
  for (Eigen::Index i = 0; i < p.prob.size(); ++i)
    out += std::to_string(i) + "," + io::format_double(p.prob[i]) + "," + std::to_string(p.labels[i]) + "\n";
  return out;
}

std::string regime_csv(const std::optional<metrics::RegimeProfile>& r) {
  std::string out = "group,distance,cumulative_accuracy\n";
  if (!r) return out;
  for (int g = 0; g < kNumGroups; ++g)
    for (const auto& [dist, acc] : r->curve[static_cast<std::size_t>(g)])
      out += std::to_string(g) + "," + io::format_double(dist) + "," + io::format_double(acc) + "\n";
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

}  // namespace

PipelineResult run_in_memory(const PipelineConfig& cfg, const PipelineInputs& inputs, std::string* failed_stage) {
  PipelineResult res;
  StageClock clock(res.stage_ms, failed_stage);
  const GroupedDataset unlabeled = inputs.ds.without_labels();
  const WeakLabelMatrix& wl = inputs.wl;

  clock.run("validate", [&] {
    require_valid(inputs.ds, wl);
    if (wl.m() < 3) throw InputError("accuracy estimation needs at least 3 labeling functions, got " + std::to_string(wl.m()));
  });

  clock.run("estimate", [&] { res.estimate_before = estimate::estimate_accuracies(wl, unlabeled.groups, cfg.aggregation); });

  clock.run("transport", [&] {
    if (cfg.passthrough) {
      res.relabel.new_votes = wl;
      res.relabel.changed_mask.setConstant(wl.n(), wl.m(), false);
    } else {
      res.relabel = transport::sbm_transport(unlabeled, wl, res.estimate_before, cfg);
    }
  });

  clock.run("label_model", [&] {
    const auto base_params = labelmodel::fit_label_model(res.estimate_before, cfg.class_balance);
    res.baseline = labelmodel::infer_pseudolabels(base_params, wl);
    if (cfg.passthrough) {
      res.estimate_after = res.estimate_before;
      res.pseudo = res.baseline;
    } else {
      res.estimate_after = estimate::estimate_accuracies(res.relabel.new_votes, unlabeled.groups, cfg.aggregation);
      const auto params = labelmodel::fit_label_model(res.estimate_after, cfg.class_balance);
      res.pseudo = labelmodel::infer_pseudolabels(params, res.relabel.new_votes);
    }
  });

  if (cfg.end_model) {
    clock.run("end_model", [&] {
      const labelmodel::TrainOptions opt{cfg.epochs, cfg.lr, cfg.l2, cfg.hard_labels};
      res.end_model = labelmodel::train_end_model(unlabeled.features, res.pseudo.prob, opt);
      res.end_prediction = labelmodel::predict(*res.end_model, unlabeled.features);
    });
  }

  clock.run("metrics", [&] {
    if (!inputs.ds.labels) {
      res.metrics_skipped = true;
      return;
    }
    res.metrics_skipped = false;
    const IntVector& gold = *inputs.ds.labels;
    const IntVector& groups = inputs.ds.groups;
    res.baseline_report = metrics::fairness_report(res.baseline.labels, gold, groups);
    res.pseudo_report = metrics::fairness_report(res.pseudo.labels, gold, groups);
    if (res.end_prediction) res.end_report = metrics::fairness_report(res.end_prediction->labels, gold, groups);
    res.lf_rows = metrics::lf_delta_report(wl, res.relabel.new_votes, gold, groups, inputs.lf_names);
    const Eigen::Index n = inputs.ds.n();
    if (n >= 10) {
      std::vector<bool> correct(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) correct[static_cast<std::size_t>(i)] = res.pseudo.labels[i] == gold[i];
      res.regime = metrics::regime_profile(inputs.ds.features, correct, groups, spread_candidates(n, 64));
    }
  });

  clock.done();
  return res;
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const RunPaths& paths) {
  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_json(cfg);
  json digests = json::object();
  std::string failed_stage = "load";
  std::vector<std::pair<std::string, double>> load_ms;

  auto write_manifest = [&](const PipelineResult* res) {
    json timings = json::object();
    for (const auto& [stage, ms] : load_ms) timings[stage] = ms;
    if (res)
      for (const auto& [stage, ms] : res->stage_ms) timings[stage] = ms;
    manifest["input_digests"] = digests;
    manifest["failed_stage"] = failed_stage.empty() ? json(nullptr) : json(failed_stage);
    manifest["stage_timings_ms"] = timings;
    manifest["created_at"] = utc_timestamp();
    io::write_file_atomic(paths.out_dir / "manifest.json", manifest.dump(2) + "\n");
  };

  PipelineInputs inputs;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    if (paths.config_file) digests[paths.config_file->string()] = digest::sha256_file(*paths.config_file);
    digests[paths.features.string()] = digest::sha256_file(paths.features);
    digests[paths.votes.string()] = digest::sha256_file(paths.votes);
    inputs.ds = io::load_features_csv(paths.features);
    auto votes = io::read_votes_csv(paths.votes);
    inputs.wl = std::move(votes.votes);
    inputs.lf_names = std::move(votes.names);
    if (inputs.wl.n() != inputs.ds.n()) {
      std::ostringstream msg;
      msg << "votes have " << inputs.wl.n() << " rows but features have " << inputs.ds.n();
      throw InputError(msg.str());
    }
    const std::chrono::duration<double, std::milli> dt = std::chrono::steady_clock::now() - t0;
    load_ms.emplace_back("load", dt.count());
  } catch (...) {
    write_manifest(nullptr);
    throw;
  }

  PipelineResult res;
  try {
    res = run_in_memory(cfg, inputs, &failed_stage);
  } catch (...) {
    write_manifest(nullptr);
    throw;
  }
  if (res.metrics_skipped) std::clog << "notice: no gold labels; metrics stage skipped\n";

  // Only the deterministic part of the manifest enters the digest.
  json stable = {{"version", manifest["version"]}, {"config", manifest["config"]}, {"input_digests", digests}};
  const std::string manifest_digest = digest::sha256_hex(stable.dump());

  json fairness = json::object();
  fairness["skipped"] = res.metrics_skipped;
  json per_lf = json::array();
  for (const auto& row : res.lf_rows)
    per_lf.push_back({{"name", row.name},
                      {"before", to_json(row.before)},
                      {"after", to_json(row.after)},
                      {"delta", to_json(row.delta)}});
  fairness["per_lf"] = per_lf;
  if (res.pseudo_report)
    fairness["pseudolabels"] = {{"before", to_json(*res.baseline_report)},
                                {"after", to_json(*res.pseudo_report)},
                                {"delta", to_json(metrics::difference(*res.pseudo_report, *res.baseline_report))}};
  else
    fairness["pseudolabels"] = nullptr;
  fairness["end_model"] = res.end_report ? to_json(*res.end_report) : json(nullptr);
  fairness["estimated_accuracy"] = {{"before", to_json(res.estimate_before.per_lf_group)},
                                    {"after", to_json(res.estimate_after.per_lf_group)}};
  fairness["transport"] = to_json(res.relabel.decisions);
  fairness["manifest_digest"] = manifest_digest;

  failed_stage = "write";
  try {
    io::write_file_atomic(paths.out_dir / "relabeled_votes.csv", io::votes_to_csv(res.relabel.new_votes, inputs.lf_names));
    io::write_file_atomic(paths.out_dir / "pseudolabels.csv", pseudolabels_csv(res.pseudo));
    io::write_file_atomic(paths.out_dir / "fairness.json", fairness.dump(2) + "\n");
    io::write_file_atomic(paths.out_dir / "regime_profile.csv", regime_csv(res.regime));
  } catch (...) {
    write_manifest(&res);
    throw;
  }
  failed_stage.clear();
  manifest["manifest_digest"] = manifest_digest;
  write_manifest(&res);
  return res;
}

synthetic::SyntheticModel theorem2_model(Eigen::Index d, double theta0) {
  auto model = synthetic::SyntheticModel::standard(d, theta0);
  synthetic::AffineMap g1;
  g1.linear = Matrix::Identity(d, d);
  g1.offset = Vector::Zero(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    g1.linear(i, i) = 0.8 + 0.3 * static_cast<double>(i % 3);
    if (i + 1 < d) g1.linear(i, i + 1) = 0.25;
    g1.offset[i] = (i % 2 == 0) ? 2.0 : -1.0;
  }
  model.group_transforms[1] = g1;
  return model;
}

TheoryResult run_theory_suite(const TheoryConfig& cfg) {
  TheoryResult out;
  {
    const auto model = synthetic::SyntheticModel::standard(cfg.theorem1_dim, cfg.theorem1_theta0);
    synthetic::Theorem1Options opt;
    opt.n = cfg.theorem1_n;
    opt.seed = derive_seed(cfg.seed, 1);
    out.theorem1 = synthetic::theorem1_sweep(model, cfg.theorem1_shifts, opt);
  }
  for (std::size_t i = 0; i < cfg.lipschitz_theta0.size(); ++i) {
    const auto model = synthetic::SyntheticModel::standard(cfg.lipschitz_dim, cfg.lipschitz_theta0[i]);
    out.lipschitz.push_back(synthetic::lipschitz_check(model, cfg.lipschitz_pairs, derive_seed(cfg.seed, 100 + i)));
  }
  {
    synthetic::Theorem2Options opt;
    opt.n_eval = cfg.theorem2_eval;
    opt.seed = derive_seed(cfg.seed, 2);
    out.theorem2 = synthetic::theorem2_sweep(theorem2_model(cfg.theorem2_dim, cfg.theorem2_theta0), cfg.theorem2_sizes, opt);
  }
  out.all_passed = out.theorem1.passed && out.theorem2.passed;
  for (const auto& l : out.lipschitz) out.all_passed = out.all_passed && l.passed;
  return out;
}

namespace {

json report_json(const synthetic::TheoremReport& r) {
  json diag = json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = v;
  return {{"name", r.name},
          {"sweep_values", r.sweep_values},
          {"measured", r.measured},
          {"bound_or_limit", r.bound_or_limit},
          {"std_error", r.std_error},
          {"diagnostics", diag},
          {"passed", r.passed}};
}

std::string sweep_csv(const synthetic::TheoremReport& r) {
  std::string out = "sweep_value,measured,bound_or_limit,std_error";
  for (const auto& [k, v] : r.diagnostics) out += "," + k;
  out += "\n";
  for (std::size_t i = 0; i < r.sweep_values.size(); ++i) {
    out += io::format_double(r.sweep_values[i]) + "," + io::format_double(r.measured[i]) + "," +
           io::format_double(r.bound_or_limit[i]) + "," + (i < r.std_error.size() ? io::format_double(r.std_error[i]) : "");
    for (const auto& [k, v] : r.diagnostics) out += "," + (i < v.size() ? io::format_double(v[i]) : std::string());
    out += "\n";
  }
  return out;
}

}  // namespace

std::string theory_json(const TheoryResult& result) {
  json lip = json::array();
  for (const auto& l : result.lipschitz)
    lip.push_back({{"theta0", l.theta0},
                   {"max_ratio", l.max_ratio},
                   {"bound", l.bound},
                   {"pairs", l.pairs},
                   {"violations", l.violations},
                   {"passed", l.passed}});
  json out = {{"version", kVersion},
              {"theorem1", report_json(result.theorem1)},
              {"theorem2", report_json(result.theorem2)},
              {"lipschitz", lip},
              {"all_passed", result.all_passed}};
  return out.dump(2) + "\n";
}

void write_theory_outputs(const TheoryResult& result, const std::filesystem::path& out_dir) {
  io::write_file_atomic(out_dir / "theory.json", theory_json(result));
  io::write_file_atomic(out_dir / "theorem1_sweep.csv", sweep_csv(result.theorem1));
  io::write_file_atomic(out_dir / "theorem2_sweep.csv", sweep_csv(result.theorem2));
}

}  // namespace sbm::pipeline
