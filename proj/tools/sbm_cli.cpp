#include "sbm/config.hpp"
#include "sbm/csv.hpp"
#include "sbm/lf_bank.hpp"
#include "sbm/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

namespace {

enum Exit { kOk = 0, kInput = 1, kNumerical = 2, kTheory = 3 };

// Numeric columns (parse on every row) become features; group and label are appended.
std::string bank_features_csv(const sbm::io::RawTable& table, const sbm::IntVector& groups,
                              const sbm::IntVector& labels, bool with_labels) {
  std::vector<std::size_t> numeric;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    bool ok = !table.rows.empty();
    for (const auto& row : table.rows)
      if (!sbm::io::parse_double(row[c])) {
        ok = false;
        break;
      }
    if (ok) numeric.push_back(c);
  }
  std::string out;
  for (auto c : numeric) out += table.header[c] + ",";
  out += with_labels ? "group,label\n" : "group\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (auto c : numeric) out += sbm::io::format_double(*sbm::io::parse_double(table.rows[i][c])) + ",";
    out += std::to_string(groups[static_cast<Eigen::Index>(i)]);
    if (with_labels) out += "," + std::to_string(labels[static_cast<Eigen::Index>(i)]);
    out += "\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-bias mitigation for weak supervision"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "estimate, transport, relabel, aggregate and report");
  sbm::pipeline::RunPaths paths;
  std::string config_path;
  std::map<std::string, std::string> overrides;
  bool passthrough = false;
  bool hard_labels = false;
  std::string sinkhorn_cost;
  run->add_option("--features", paths.features, "features CSV (numeric columns, group, optional label)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--votes", paths.votes, "votes CSV")->required()->check(CLI::ExistingFile);
  run->add_option("--out", paths.out_dir, "output directory")->required();
  run->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  for (const auto& key : sbm::config::config_keys()) {
    std::string dashed = key;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    const std::string names = dashed == key ? "--" + key : "--" + key + ",--" + dashed;
    run->add_option_function<std::string>(names, [&overrides, key](const std::string& v) { overrides[key] = v; },
                                          "overrides config key " + key);
  }
  run->add_flag("--passthrough", passthrough, "skip transport (vanilla weak supervision)");
  run->add_flag("--hard-labels", hard_labels, "train the end model on hard pseudolabels");
  run->add_option("--sinkhorn-cost", sinkhorn_cost, "median (default) or raw cost scaling")
      ->check(CLI::IsMember({"median", "raw"}));

  // theory
  auto* theory = app.add_subcommand("theory", "run the theorem checks on synthetic data");
  sbm::pipeline::TheoryConfig tcfg;
  std::string theory_out;
  theory->add_option("--out", theory_out, "output directory for theory.json and sweep CSVs");
  theory->add_option("--seed", tcfg.seed);
  theory->add_option("--theta0", tcfg.theorem1_theta0, "theta0 for the shift sweep");
  theory->add_option("--shifts", tcfg.theorem1_shifts, "translation magnitudes, increasing")->delimiter(',');
  theory->add_option("--n", tcfg.theorem1_n, "samples per shift");
  theory->add_option("--lipschitz-theta0", tcfg.lipschitz_theta0)->delimiter(',');
  theory->add_option("--lipschitz-pairs", tcfg.lipschitz_pairs);
  theory->add_option("--theorem2-theta0", tcfg.theorem2_theta0);
  theory->add_option("--theorem2-sizes", tcfg.theorem2_sizes)->delimiter(',');
  theory->add_option("--theorem2-eval", tcfg.theorem2_eval);

  // lf-bank
  auto* bank = app.add_subcommand("lf-bank", "materialize a built-in LF bank from a raw CSV");
  std::string bank_name;
  std::string raw_path;
  std::string format = "csv";
  char delimiter = 0;
  std::string aliases_path;
  std::string votes_out;
  std::string features_out;
  bank->add_option("--bank", bank_name)->required()->check(CLI::IsMember(sbm::lf::builtin_bank_names()));
  bank->add_option("--input", raw_path, "raw dataset file")->required()->check(CLI::ExistingFile);
  bank->add_option("--format", format, "csv (with header) or adult-uci (headerless UCI Adult)")
      ->check(CLI::IsMember({"csv", "adult-uci"}));
  bank->add_option("--delimiter", delimiter, "field delimiter (default ',' or ';' for bank-v1)");
  bank->add_option("--aliases", aliases_path, "category alias file")->check(CLI::ExistingFile);
  bank->add_option("--votes-out", votes_out)->required();
  bank->add_option("--features-out", features_out, "numeric features + group (+ label) CSV");

  // validate
  auto* validate = app.add_subcommand("validate", "check features and votes for consistency");
  std::string v_features;
  std::string v_votes;
  validate->add_option("--features", v_features)->required()->check(CLI::ExistingFile);
  validate->add_option("--votes", v_votes)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*run) {
      sbm::PipelineConfig cfg;
      if (!config_path.empty()) {
        cfg = sbm::config::load_config(config_path);
        paths.config_file = config_path;
      }
      for (const auto& [k, v] : overrides) sbm::config::apply_setting(cfg, k, v);
      cfg.passthrough = passthrough;
      cfg.hard_labels = hard_labels;
      if (sinkhorn_cost == "raw") cfg.sinkhorn_cost = sbm::CostScaling::raw;
      const auto res = sbm::pipeline::run_pipeline(cfg, paths);
      std::cout << "wrote artifacts to " << paths.out_dir.string() << "\n";
      if (res.pseudo_report)
        std::cout << "pseudolabel accuracy " << res.pseudo_report->accuracy << ", dp_gap " << res.pseudo_report->dp_gap
                  << " (baseline " << res.baseline_report->accuracy << ", " << res.baseline_report->dp_gap << ")\n";
      return kOk;
    }
    if (*theory) {
      const auto result = sbm::pipeline::run_theory_suite(tcfg);
      if (!theory_out.empty()) sbm::pipeline::write_theory_outputs(result, theory_out);
      std::cout << sbm::pipeline::theory_json(result);
      return result.all_passed ? kOk : kTheory;
    }
    if (*bank) {
      const auto aliases = aliases_path.empty() ? sbm::lf::AliasMap{} : sbm::lf::load_alias_file(aliases_path);
      const auto lfs = sbm::lf::builtin_bank(bank_name, aliases);
      if (!delimiter) delimiter = bank_name == "bank-v1" ? ';' : ',';
      const auto table =
          format == "adult-uci" ? sbm::io::read_adult_uci(raw_path) : sbm::io::read_raw_table(raw_path, delimiter);
      const auto wl = sbm::lf::apply_lf_bank(table, lfs.rules);
      sbm::io::write_file_atomic(votes_out, sbm::io::votes_to_csv(wl));
      if (!features_out.empty()) {
        const auto groups = sbm::lf::evaluate_groups(lfs, table);
        bool with_labels = true;
        for (const auto& c : lfs.label.columns()) with_labels = with_labels && table.find(c).has_value();
        const auto labels = with_labels ? sbm::lf::evaluate_labels(lfs, table) : sbm::IntVector();
        sbm::io::write_file_atomic(features_out, bank_features_csv(table, groups, labels, with_labels));
      }
      std::cout << "wrote " << wl.n() << " x " << wl.m() << " votes to " << votes_out << "\n";
      return kOk;
    }
    if (*validate) {
      const auto ds = sbm::io::load_features_csv(v_features);
      const auto votes = sbm::io::read_votes_csv(v_votes);
      if (votes.votes.n() != ds.n()) {
        std::cerr << "error: votes have " << votes.votes.n() << " rows but features have " << ds.n() << "\n";
        return kInput;
      }
      const auto violations = sbm::validate_dataset(ds, votes.votes);
      for (const auto& v : violations) std::cerr << "error: " << v.what << "\n";
      if (!violations.empty()) return kInput;
      std::cout << "ok: " << ds.n() << " rows, " << ds.dim() << " features, " << votes.votes.m() << " LFs\n";
      return kOk;
    }
  } catch (const sbm::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const sbm::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
  return kOk;
}
