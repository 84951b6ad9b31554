#pragma once

#include "sbm/synthetic.hpp"

namespace fixture {

// Two groups, group 1 = group 0 translated by 50 along x. LF 0 is accurate
// near the group-0 center and close to a coin flip on group 1; LFs 1-4 have
// constant accuracy. About 30% of labels are positive.
inline sbm::synthetic::SyntheticSample shifted_groups(std::uint64_t seed, Eigen::Index n = 8000) {
  using namespace sbm;
  auto m = synthetic::SyntheticModel::standard(2, 3.0);
  m.group_transforms[1] = synthetic::AffineMap::translation(Eigen::Vector2d(50.0, 0.0));
  m.label_direction = Vector(Eigen::Vector2d(1.0, 0.5).normalized());
  m.label_offset = -0.52;
  return synthetic::sample_labeled(m, n, seed, {0.8, 0.75, 0.7, 0.65});
}

// Fraction of rows in group g where LF j agrees with the gold label.
inline double lf_group_accuracy(const sbm::WeakLabelMatrix& wl, const sbm::GroupedDataset& ds, Eigen::Index j,
                                int g) {
  double hit = 0, total = 0;
  for (Eigen::Index i = 0; i < wl.n(); ++i)
    if (ds.groups[i] == g) {
      hit += wl(i, j) == (*ds.labels)[i];
      total += 1;
    }
  return hit / total;
}

}  // namespace fixture
