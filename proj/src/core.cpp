#include "sbm/core.hpp"

#include <algorithm>
#include <sstream>

namespace sbm {

WeakLabelMatrix WeakLabelMatrix::select_rows(const std::vector<Eigen::Index>& rows) const {
  VoteMatrix out(static_cast<Eigen::Index>(rows.size()), m());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = votes.row(rows[r]);
  return WeakLabelMatrix(std::move(out));
}

std::vector<Eigen::Index> GroupedDataset::rows_of_group(int group) const {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < groups.size(); ++i)
    if (groups[i] == group) rows.push_back(i);
  return rows;
}

Matrix GroupedDataset::group_features(int group) const {
  const auto rows = rows_of_group(group);
  Matrix out(static_cast<Eigen::Index>(rows.size()), dim());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = features.row(rows[r]);
  return out;
}

GroupedDataset GroupedDataset::without_labels() const {
  return GroupedDataset{features, groups, std::nullopt};
}

std::string to_string(OtType t) {
  switch (t) {
    case OtType::none: return "none";
    case OtType::linear: return "linear";
    case OtType::sinkhorn: return "sinkhorn";
  }
  return "?";
}

std::string to_string(TransportScope s) { return s == TransportScope::per_lf ? "per_lf" : "global"; }

std::string to_string(Aggregation a) { return a == Aggregation::median ? "median" : "mean"; }

OtType parse_ot_type(const std::string& s) {
  if (s == "none") return OtType::none;
  if (s == "linear") return OtType::linear;
  if (s == "sinkhorn") return OtType::sinkhorn;
  throw InputError("unknown ot_type '" + s + "' (expected none|linear|sinkhorn)");
}

TransportScope parse_transport_scope(const std::string& s) {
  if (s == "per_lf") return TransportScope::per_lf;
  if (s == "global") return TransportScope::global;
  throw InputError("unknown transport_scope '" + s + "' (expected per_lf|global)");
}

std::vector<Violation> validate_votes(const WeakLabelMatrix& wl) {
  std::vector<Violation> out;
  if (wl.n() < 1) out.push_back({"vote matrix has no rows"});
  if (wl.m() < 1) out.push_back({"vote matrix has no labeling functions"});
  for (Eigen::Index j = 0; j < wl.m(); ++j) {
    for (Eigen::Index i = 0; i < wl.n(); ++i) {
      const int v = wl(i, j);
      if (v < -1 || v > 1) {
        std::ostringstream msg;
        msg << "illegal vote " << v << " at row " << i << ", lf " << j;
        out.push_back({msg.str()});
      }
    }
  }
  return out;
}

std::vector<Violation> validate_dataset(const GroupedDataset& ds, const WeakLabelMatrix& wl) {
  std::vector<Violation> out;
  const auto n = ds.n();
  auto mismatch = [&](const char* what, Eigen::Index got) {
    std::ostringstream msg;
    msg << "row-count mismatch: features have " << n << " rows, " << what << " has " << got;
    out.push_back({msg.str()});
  };
  if (ds.groups.size() != n) mismatch("groups", ds.groups.size());
  if (ds.labels && ds.labels->size() != n) mismatch("labels", ds.labels->size());
  if (wl.n() != n) mismatch("votes", wl.n());

  int count[kNumGroups] = {0, 0};
  for (Eigen::Index i = 0; i < ds.groups.size(); ++i) {
    const int g = ds.groups[i];
    if (g == 0 || g == 1) {
      ++count[g];
    } else {
      std::ostringstream msg;
      msg << "illegal group value " << g << " at row " << i;
      out.push_back({msg.str()});
    }
  }
  for (int g = 0; g < kNumGroups; ++g)
    if (count[g] == 0) out.push_back({"empty group " + std::to_string(g)});

  if (ds.labels) {
    for (Eigen::Index i = 0; i < ds.labels->size(); ++i) {
      const int y = (*ds.labels)[i];
      if (y != -1 && y != 1) {
        std::ostringstream msg;
        msg << "illegal label " << y << " at row " << i;
        out.push_back({msg.str()});
      }
    }
  }
  if (!ds.features.allFinite()) out.push_back({"non-finite feature value"});

  auto vote_issues = validate_votes(wl);
  out.insert(out.end(), vote_issues.begin(), vote_issues.end());
  return out;
}

namespace {

[[noreturn]] void throw_violations(const std::vector<Violation>& v) {
  std::ostringstream msg;
  msg << "invalid input (" << v.size() << " violation" << (v.size() == 1 ? "" : "s") << ")";
  const std::size_t shown = std::min<std::size_t>(v.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) msg << "\n  " << v[i].what;
  if (shown < v.size()) msg << "\n  ...";
  throw InputError(msg.str());
}

}  // namespace

void require_valid(const GroupedDataset& ds, const WeakLabelMatrix& wl) {
  auto v = validate_dataset(ds, wl);
  if (!v.empty()) throw_violations(v);
}

void require_valid(const WeakLabelMatrix& wl) {
  auto v = validate_votes(wl);
  if (!v.empty()) throw_violations(v);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over base + index
  std::uint64_t z = base + index * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace sbm
