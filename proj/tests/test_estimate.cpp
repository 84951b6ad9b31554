#include "sbm/estimate.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <numeric>

using namespace sbm;
using namespace sbm::estimate;

namespace {

WeakLabelMatrix copies_of(const IntVector& y, const std::vector<int>& signs) {
  VoteMatrix v(y.size(), static_cast<Eigen::Index>(signs.size()));
  for (std::size_t j = 0; j < signs.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = y * signs[j];
  return WeakLabelMatrix(v);
}

IntVector alternating(Eigen::Index n) {
  IntVector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = (i % 3 == 0) ? -1 : 1;
  return y;
}

}  // namespace

TEST_CASE("pairwise moment extremes") {
  const IntVector y = alternating(30);
  const auto wl = copies_of(y, {1, 1, -1});
  CHECK(*pairwise_moment(wl, 0, 1) == 1.0);
  CHECK(*pairwise_moment(wl, 0, 2) == -1.0);
}

TEST_CASE("pairwise moment over mutual non-abstains only") {
  VoteMatrix v(4, 2);
  v << 1, 1, 1, 0, -1, 1, 0, 0;
  const WeakLabelMatrix wl(v);
  CHECK(*pairwise_moment(wl, 0, 1) == 0.0);  // rows 0 and 2
  v.col(1).setZero();
  CHECK_FALSE(pairwise_moment(WeakLabelMatrix(v), 0, 1).has_value());
}

TEST_CASE("pairwise moment of independent coins") {
  std::mt19937_64 rng(11);
  const auto wl = oracle::independent_lfs(rng, 1000000, {0.5, 0.5});
  CHECK(std::abs(*pairwise_moment(wl, 0, 1)) <= 0.005);
}

TEST_CASE("perfect LFs give unit accuracy") {
  const auto r = triplet_accuracies(copies_of(alternating(60), {1, 1, 1}));
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(r.accuracies[j] == doctest::Approx(1.0));
}

TEST_CASE("population moments recover accuracies exactly") {
  const std::vector<double> a = {0.8, 0.6, 0.4, 0.3, 0.2};
  MomentTable mt(a.size(), std::vector<std::optional<double>>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (i != j) mt[i][j] = a[i] * a[j];
  for (auto agg : {Aggregation::median, Aggregation::mean}) {
    const auto r = triplet_from_moments(mt, agg);
    for (std::size_t j = 0; j < a.size(); ++j)
      CHECK(std::abs(r.magnitudes[static_cast<Eigen::Index>(j)] - a[j]) <= 1e-12);
  }
}

TEST_CASE("sampled moments recover accuracies") {
  std::mt19937_64 rng(3);
  const auto wl = oracle::independent_lfs(rng, 100000, {0.9, 0.8, 0.7, 0.65, 0.6});
  const auto r = triplet_accuracies(wl);
  const std::vector<double> a = {0.8, 0.6, 0.4, 0.3, 0.2};
  for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(r.accuracies[static_cast<Eigen::Index>(j)] - a[j]) <= 0.02);
}

TEST_CASE("magnitudes are clamped to one") {
  // Ratio under the root exceeds 1 for LF 0: E01 = E02 = 0.9, E12 = 0.5.
  MomentTable mt(3, std::vector<std::optional<double>>(3));
  auto set = [&](int i, int j, double v) { mt[i][j] = mt[j][i] = v; };
  set(0, 1, 0.9);
  set(0, 2, 0.9);
  set(1, 2, 0.5);
  const auto r = triplet_from_moments(mt);
  CHECK(r.magnitudes[0] == 1.0);
  CHECK(r.magnitudes.maxCoeff() <= 1.0);
}

TEST_CASE("degenerate triplets") {
  MomentTable mt(3, std::vector<std::optional<double>>(3));
  auto set = [&](int i, int j, double v) { mt[i][j] = mt[j][i] = v; };
  set(0, 1, 0.5);
  set(0, 2, 0.0);
  set(1, 2, 0.0);
  // LF 0 and LF 1 have zero denominators; LF 2's value is 0.
  CHECK_THROWS_AS(triplet_from_moments(mt), NumericalError);
  set(1, 2, 0.0005);
  CHECK_THROWS_AS(triplet_from_moments(mt), NumericalError);
  CHECK_THROWS_AS(triplet_from_moments(MomentTable(2, std::vector<std::optional<double>>(2))), InputError);
}

TEST_CASE("degenerate triplet skipped when another triplet covers the LF") {
  // LF 3 abstains on every row, so every triplet containing it is degenerate
  // for its partners but the 0-1-2 triplet still covers LFs 0..2.
  const IntVector y = alternating(30);
  VoteMatrix v(30, 4);
  v.leftCols(3) = copies_of(y, {1, 1, 1}).votes;
  v.col(3).setZero();
  const auto mt = moment_table(WeakLabelMatrix(v));
  CHECK_FALSE(mt[0][3].has_value());
  CHECK_THROWS_AS(triplet_from_moments(mt), NumericalError);  // LF 3 itself has no value
  const auto r = triplet_from_moments(moment_table(WeakLabelMatrix(VoteMatrix(v.leftCols(3)))));
  CHECK(r.magnitudes[0] == 1.0);
}

TEST_CASE("sign resolution") {
  const IntVector y = alternating(60);
  SUBCASE("all copies of y") {
    const auto r = triplet_accuracies(copies_of(y, {1, 1, 1, 1}));
    CHECK((r.accuracies.array() > 0).all());
  }
  SUBCASE("one flipped LF among four") {
    const auto wl = copies_of(y, {1, 1, -1, 1, 1});
    const auto s = resolve_sign(Vector::Ones(5), wl);
    CHECK(s[2] == -1.0);
    for (int j : {0, 1, 3, 4}) CHECK(s[j] == 1.0);
  }
  SUBCASE("tie rows contribute zero") {
    VoteMatrix v(2, 2);
    v << 1, -1, 1, 1;
    const IntVector mv = majority_vote(WeakLabelMatrix(v));
    CHECK(mv[0] == 0);
    CHECK(mv[1] == 1);
    const auto s = resolve_sign(Vector::Constant(2, 0.5), WeakLabelMatrix(v));
    CHECK(s[0] == 0.5);
    CHECK(s[1] == 0.5);
  }
}

TEST_CASE("per group accuracies") {
  SUBCASE("LF flipped in group 1") {
    const IntVector y = alternating(60);
    VoteMatrix v = copies_of(y, {1, 1, 1, 1, 1}).votes;
    IntVector groups(60);
    for (Eigen::Index i = 0; i < 60; ++i) groups[i] = i < 30 ? 0 : 1;
    for (Eigen::Index i = 30; i < 60; ++i) v(i, 1) = -v(i, 1);
    const Matrix acc = per_group_accuracies(WeakLabelMatrix(v), groups);
    CHECK(acc(1, 0) == doctest::Approx(1.0));
    CHECK(acc(1, 1) == doctest::Approx(-1.0));
  }
  SUBCASE("identical group distributions") {
    std::mt19937_64 rng(5);
    const auto wl = oracle::independent_lfs(rng, 100000, {0.85, 0.75, 0.7, 0.65});
    IntVector groups(100000);
    for (Eigen::Index i = 0; i < groups.size(); ++i) groups[i] = static_cast<int>(i % 2);
    const Matrix acc = per_group_accuracies(wl, groups);
    for (Eigen::Index j = 0; j < 4; ++j) CHECK(std::abs(acc(j, 0) - acc(j, 1)) <= 0.03);
  }
  SUBCASE("errors name the group") {
    const IntVector y = alternating(10);
    VoteMatrix v = copies_of(y, {1, 1, 1}).votes;
    IntVector groups = IntVector::Zero(10);
    groups[9] = 1;
    v.row(9).setZero();
    try {
      per_group_accuracies(WeakLabelMatrix(v), groups);
      FAIL("expected an error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("group 1") != std::string::npos);
    }
  }
}

TEST_CASE("permutation equivariance and row-shuffle invariance") {
  std::mt19937_64 rng(9);
  const auto wl = oracle::independent_lfs(rng, 5000, {0.9, 0.7, 0.8, 0.6});
  const auto base = triplet_accuracies(wl);

  const std::vector<int> perm = {2, 0, 3, 1};
  VoteMatrix pv(wl.n(), 4);
  for (int j = 0; j < 4; ++j) pv.col(j) = wl.votes.col(perm[j]);
  const auto permuted = triplet_accuracies(WeakLabelMatrix(pv));
  for (int j = 0; j < 4; ++j) CHECK(permuted.accuracies[j] == doctest::Approx(base.accuracies[perm[j]]).epsilon(1e-12));

  std::vector<Eigen::Index> rows(static_cast<std::size_t>(wl.n()));
  std::iota(rows.begin(), rows.end(), 0);
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto shuffled = triplet_accuracies(wl.select_rows(rows));
  for (int j = 0; j < 4; ++j) CHECK(shuffled.accuracies[j] == base.accuracies[j]);
}
