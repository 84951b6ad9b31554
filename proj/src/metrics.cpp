#include "sbm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sbm::metrics {

namespace {

void check_lengths(const IntVector& pred, const IntVector& gold, const IntVector& groups) {
  if (pred.size() != gold.size() || pred.size() != groups.size()) {
    std::ostringstream msg;
    msg << "fairness_report: length mismatch (pred " << pred.size() << ", gold " << gold.size() << ", groups "
        << groups.size() << ")";
    throw InputError(msg.str());
  }
}

}  // namespace

double f1_score(const IntVector& pred, const IntVector& gold) {
  long tp = 0, fp = 0, fn = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == 1;
    const bool g = gold[i] == 1;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  const double denom = 2.0 * tp + fp + fn;
  return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

FairnessReport fairness_report(const IntVector& pred, const IntVector& gold, const IntVector& groups) {
  check_lengths(pred, gold, groups);
  std::array<long, kNumGroups> count{}, correct{}, positive{}, gold_pos{}, true_pos{};
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const int g = groups[i];
    if (g != 0 && g != 1) throw InputError("fairness_report: group values must be 0 or 1");
    ++count[g];
    correct[g] += pred[i] == gold[i];
    positive[g] += pred[i] == 1;
    if (gold[i] == 1) {
      ++gold_pos[g];
      true_pos[g] += pred[i] == 1;
    }
  }
  for (int g = 0; g < kNumGroups; ++g)
    if (count[g] == 0) throw InputError("fairness_report: group " + std::to_string(g) + " is empty");

  FairnessReport r;
  r.accuracy = static_cast<double>(correct[0] + correct[1]) / static_cast<double>(pred.size());
  r.f1 = f1_score(pred, gold);
  for (int g = 0; g < kNumGroups; ++g) {
    r.per_group_accuracy[g] = static_cast<double>(correct[g]) / static_cast<double>(count[g]);
    r.positive_rate_per_group[g] = static_cast<double>(positive[g]) / static_cast<double>(count[g]);
  }
  r.dp_gap = std::abs(r.positive_rate_per_group[1] - r.positive_rate_per_group[0]);
  if (gold_pos[0] > 0 && gold_pos[1] > 0) {
    const double tpr0 = static_cast<double>(true_pos[0]) / static_cast<double>(gold_pos[0]);
    const double tpr1 = static_cast<double>(true_pos[1]) / static_cast<double>(gold_pos[1]);
    r.eo_gap = std::abs(tpr1 - tpr0);
  }
  return r;
}

MetricDelta difference(const FairnessReport& after, const FairnessReport& before) {
  MetricDelta d;
  d.accuracy = after.accuracy - before.accuracy;
  d.f1 = after.f1 - before.f1;
  d.dp_gap = after.dp_gap - before.dp_gap;
  if (after.eo_gap && before.eo_gap) d.eo_gap = *after.eo_gap - *before.eo_gap;
  return d;
}

std::vector<LfDeltaRow> lf_delta_report(const WeakLabelMatrix& before, const WeakLabelMatrix& after,
                                        const IntVector& gold, const IntVector& groups,
                                        const std::vector<std::string>& names) {
  if (before.n() != after.n() || before.m() != after.m())
    throw InputError("lf_delta_report: before and after vote matrices differ in shape");
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != before.m())
    throw InputError("lf_delta_report: name count does not match LF count");
  std::vector<LfDeltaRow> rows;
  for (Eigen::Index j = 0; j < before.m(); ++j) {
    LfDeltaRow row;
    row.name = names.empty() ? "lf_" + std::to_string(j) : names[static_cast<std::size_t>(j)];
    row.before = fairness_report(before.votes.col(j), gold, groups);
    row.after = fairness_report(after.votes.col(j), gold, groups);
    row.delta = difference(row.after, row.before);
    rows.push_back(std::move(row));
  }
  return rows;
}

RegimeProfile regime_profile(const Matrix& X, const std::vector<bool>& correct_mask, const IntVector& groups,
                             const std::vector<Eigen::Index>& candidate_centers, double neighborhood_frac,
                             double step_frac) {
  const Eigen::Index n = X.rows();
  if (static_cast<Eigen::Index>(correct_mask.size()) != n || groups.size() != n)
    throw InputError("regime_profile: length mismatch");
  if (candidate_centers.empty()) throw InputError("regime_profile: no candidate centers");
  if (!(neighborhood_frac > 0.0 && neighborhood_frac <= 1.0) || !(step_frac > 0.0 && step_frac <= 1.0))
    throw InputError("regime_profile: fractions must lie in (0, 1]");
  const auto hood = static_cast<std::size_t>(std::floor(neighborhood_frac * static_cast<double>(n)));
  if (hood == 0) throw InputError("regime_profile: the nearest-neighborhood is empty; too few points");

  auto by_distance = [&](Eigen::Index center, const std::vector<Eigen::Index>& subset) {
    Vector dist = (X.rowwise() - X.row(center)).rowwise().norm();
    std::vector<Eigen::Index> order = subset;
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return dist[a] < dist[b]; });
    return std::make_pair(std::move(order), std::move(dist));
  };

  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Eigen::Index{0});

  RegimeProfile profile;
  double best = -1.0;
  for (Eigen::Index c : candidate_centers) {
    if (c < 0 || c >= n) throw InputError("regime_profile: candidate index out of range");
    const auto [order, dist] = by_distance(c, all);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < hood; ++r) hits += correct_mask[static_cast<std::size_t>(order[r])];
    const double acc = static_cast<double>(hits) / static_cast<double>(hood);
    if (acc > best) {
      best = acc;
      profile.center_index = c;
    }
  }
  profile.center_accuracy = best;

  for (int g = 0; g < kNumGroups; ++g) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i)
      if (groups[i] == g) members.push_back(i);
    if (members.empty()) continue;
    const auto [order, dist] = by_distance(profile.center_index, members);
    const std::size_t step =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(step_frac * static_cast<double>(members.size()))));
    std::size_t hits = 0;
    std::size_t included = 0;
    while (included < order.size()) {
      const std::size_t next = std::min(order.size(), included + step);
      for (; included < next; ++included) hits += correct_mask[static_cast<std::size_t>(order[included])];
      profile.curve[g].emplace_back(dist[order[included - 1]],
                                    static_cast<double>(hits) / static_cast<double>(included));
    }
  }
  return profile;
}

}  // namespace sbm::metrics
