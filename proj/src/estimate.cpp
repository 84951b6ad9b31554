#include "sbm/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sbm::estimate {

std::optional<double> pairwise_moment(const WeakLabelMatrix& wl, Eigen::Index i, Eigen::Index j) {
  if (i == j) throw InputError("pairwise_moment requires distinct labeling functions");
  long long sum = 0;
  long long count = 0;
  for (Eigen::Index r = 0; r < wl.n(); ++r) {
    const int a = wl(r, i);
    const int b = wl(r, j);
    if (a == kAbstain || b == kAbstain) continue;
    sum += a * b;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return static_cast<double>(sum) / static_cast<double>(count);
}

MomentTable moment_table(const WeakLabelMatrix& wl) {
  const auto m = static_cast<std::size_t>(wl.m());
  MomentTable table(m, std::vector<std::optional<double>>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      table[i][j] = table[j][i] = pairwise_moment(wl, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return table;
}

namespace {

std::optional<double> triplet_value(const std::optional<double>& e_ij, const std::optional<double>& e_ik,
                                    const std::optional<double>& e_jk) {
  if (!e_ij || !e_ik || !e_jk) return std::nullopt;
  if (std::abs(*e_jk) <= kPairEpsilon) return std::nullopt;
  // Sampling noise can push the ratio negative or above one.
  const double ratio = (*e_ij) * (*e_ik) / (*e_jk);
  return std::clamp(std::sqrt(std::max(ratio, 0.0)), 0.0, 1.0);
}

double aggregate(std::vector<double> values, Aggregation agg) {
  if (agg == Aggregation::mean)
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t h = values.size() / 2;
  return values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
}

}  // namespace

TripletResult triplet_from_moments(const MomentTable& moments, Aggregation agg) {
  const int m = static_cast<int>(moments.size());
  if (m < 3) throw InputError("triplet estimation needs at least 3 labeling functions, got " + std::to_string(m));

  TripletResult result;
  result.aggregation = agg;
  std::vector<std::vector<double>> per_lf(static_cast<std::size_t>(m));

  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      for (int k = j + 1; k < m; ++k) {
        const auto& e_ij = moments[i][j];
        const auto& e_ik = moments[i][k];
        const auto& e_jk = moments[j][k];
        TripletRecord rec;
        rec.indices = {i, j, k};
        rec.raw_estimates = {triplet_value(e_ij, e_ik, e_jk), triplet_value(e_ij, e_jk, e_ik),
                             triplet_value(e_ik, e_jk, e_ij)};
        for (const auto* e : {&e_ij, &e_ik, &e_jk})
          if (!e->has_value() || std::abs(**e) <= kPairEpsilon) rec.degenerate = true;
        for (int t = 0; t < 3; ++t)
          if (rec.raw_estimates[t]) per_lf[rec.indices[t]].push_back(*rec.raw_estimates[t]);
        result.records.push_back(rec);
      }
    }
  }

  result.magnitudes.resize(m);
  for (int i = 0; i < m; ++i) {
    if (per_lf[i].empty())
      throw NumericalError("every triplet for labeling function " + std::to_string(i) + " is degenerate");
    result.magnitudes[i] = aggregate(std::move(per_lf[i]), agg);
  }
  result.accuracies = result.magnitudes;
  return result;
}

TripletResult triplet_accuracies(const WeakLabelMatrix& wl, Aggregation agg) {
  require_valid(wl);
  auto result = triplet_from_moments(moment_table(wl), agg);
  result.accuracies = resolve_sign(result.magnitudes, wl);
  return result;
}

IntVector majority_vote(const WeakLabelMatrix& wl) {
  IntVector mv(wl.n());
  for (Eigen::Index r = 0; r < wl.n(); ++r) {
    const int s = wl.votes.row(r).sum();
    mv[r] = (s > 0) - (s < 0);
  }
  return mv;
}

Vector resolve_sign(const Vector& magnitudes, const WeakLabelMatrix& wl) {
  const IntVector mv = majority_vote(wl);
  const Eigen::Index m = magnitudes.size();
  std::vector<int> sign(static_cast<std::size_t>(m), 1);
  bool all_negative = m > 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    long long agree = 0;
    for (Eigen::Index r = 0; r < wl.n(); ++r)
      if (wl(r, j) != kAbstain) agree += wl(r, j) * mv[r];
    sign[j] = agree < 0 ? -1 : 1;
    if (sign[j] > 0) all_negative = false;
  }
  Vector out(m);
  for (Eigen::Index j = 0; j < m; ++j) out[j] = (all_negative ? -sign[j] : sign[j]) * magnitudes[j];
  return out;
}

Matrix per_group_accuracies(const WeakLabelMatrix& wl, const IntVector& groups, Aggregation agg) {
  if (groups.size() != wl.n()) throw InputError("groups length does not match vote rows");
  Matrix out(wl.m(), kNumGroups);
  for (int g = 0; g < kNumGroups; ++g) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < groups.size(); ++i)
      if (groups[i] == g) rows.push_back(i);
    if (rows.empty()) throw InputError("group " + std::to_string(g) + " is empty");
    try {
      out.col(g) = triplet_accuracies(wl.select_rows(rows), agg).accuracies;
    } catch (const NumericalError& e) {
      throw NumericalError("group " + std::to_string(g) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError("group " + std::to_string(g) + ": " + e.what());
    }
  }
  return out;
}

AccuracyEstimate estimate_accuracies(const WeakLabelMatrix& wl, const IntVector& groups, Aggregation agg) {
  AccuracyEstimate est;
  est.aggregation = agg;
  est.per_lf_global = triplet_accuracies(wl, agg).accuracies;
  est.per_lf_group = per_group_accuracies(wl, groups, agg);
  return est;
}

}  // namespace sbm::estimate
