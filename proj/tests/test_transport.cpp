#include "sbm/estimate.hpp"
#include "sbm/transport.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace sbm;
using namespace sbm::transport;

TEST_CASE("knn examples") {
  Matrix D(3, 2);
  D << 0, 0, 1, 0, 0, 1;
  IntVector v(3);
  v << 1, -1, -1;
  const Matrix q = D.row(1);
  CHECK(knn_transfer(q, D, v, 1)[0] == -1);
  CHECK(knn_transfer(Matrix::Random(4, 2), D, IntVector::Ones(3), 3).isConstant(1));
  CHECK_THROWS(knn_transfer(q, Matrix(0, 2), IntVector(0), 1));
}

TEST_CASE("knn tie breaks") {
  Matrix D(2, 1);
  D << 1, -1.5;
  IntVector v(2);
  v << -1, 1;
  // k=2 majority tie: nearest neighbor (x=1) wins.
  CHECK(knn_transfer(Matrix::Zero(1, 1), D, v, 2)[0] == -1);
  // exact distance tie: lower row index is nearer.
  D << 1, -1;
  CHECK(knn_transfer(Matrix::Zero(1, 1), D, v, 1)[0] == -1);
  // abstainers are skipped; all abstain gives abstain.
  v << 0, 1;
  CHECK(knn_transfer(Matrix::Zero(1, 1), D, v, 2)[0] == 1);
  v << 0, 0;
  CHECK(knn_transfer(Matrix::Zero(1, 1), D, v, 2)[0] == 0);
}

TEST_CASE("knn matches exhaustive scan") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> vote(-1, 1);
  for (int k : {1, 2, 3, 7}) {
    const Matrix D = oracle::random_matrix(rng, 200, 3);
    const Matrix Q = oracle::random_matrix(rng, 50, 3);
    IntVector v(200);
    for (Eigen::Index i = 0; i < 200; ++i) v[i] = vote(rng);
    CHECK(knn_transfer(Q, D, v, k) == oracle::knn_scan(Q, D, v, k));
  }
}

namespace {

struct Fixture {
  GroupedDataset ds;
  WeakLabelMatrix wl;
};

// Group 1 repeats the points of group 0; votes are coin flips.
Fixture mirrored(Eigen::Index half) {
  Fixture f;
  std::mt19937_64 rng(8);
  const Matrix P = oracle::random_matrix(rng, half, 2);
  f.ds.features.resize(2 * half, 2);
  f.ds.features << P, P;
  f.ds.groups.resize(2 * half);
  f.ds.groups << IntVector::Zero(half), IntVector::Ones(half);
  VoteMatrix v(2 * half, 3);
  std::uniform_int_distribution<int> coin(0, 1);
  for (Eigen::Index i = 0; i < 2 * half; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) v(i, j) = coin(rng) ? 1 : -1;
  f.wl = WeakLabelMatrix(v);
  return f;
}

AccuracyEstimate estimate_with(const Matrix& per_group) {
  AccuracyEstimate est;
  est.per_lf_group = per_group;
  est.per_lf_global = per_group.rowwise().mean();
  return est;
}

}  // namespace

TEST_CASE("identity transport copies co-located votes") {
  auto f = mirrored(40);
  Matrix acc(3, 2);
  acc << 0.9, 0.3, 0.2, 0.8, 0.5, 0.5;
  PipelineConfig cfg;
  cfg.ot_type = OtType::none;
  const auto r = sbm_transport(f.ds, f.wl, estimate_with(acc), cfg);
  // LF 0: group 1 -> group 0; LF 1: group 0 -> group 1; LF 2: tie.
  for (Eigen::Index i = 0; i < 40; ++i) {
    CHECK(r.new_votes(40 + i, 0) == f.wl(i, 0));
    CHECK(r.new_votes(i, 0) == f.wl(i, 0));
    CHECK(r.new_votes(i, 1) == f.wl(40 + i, 1));
    CHECK(r.new_votes(40 + i, 1) == f.wl(40 + i, 1));
  }
  CHECK(r.new_votes.votes.col(2) == f.wl.votes.col(2));
  REQUIRE(r.decisions.size() == 3);
  CHECK(r.decisions[0].src_group == 1);
  CHECK(r.decisions[0].dst_group == 0);
  CHECK(r.decisions[2].skipped);
  CHECK(r.decisions[2].reason == "tie");
  for (const auto& d : r.decisions)
    if (!d.skipped) CHECK(d.acc_dst >= d.acc_src);
  for (Eigen::Index i = 0; i < 80; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(r.changed_mask(i, j) == (r.new_votes(i, j) != f.wl(i, j)));
}

TEST_CASE("global scope uses one direction") {
  auto f = mirrored(30);
  Matrix acc(3, 2);
  acc << 0.9, 0.3, 0.4, 0.5, 0.6, 0.6;
  PipelineConfig cfg;
  cfg.ot_type = OtType::none;
  cfg.transport_scope = TransportScope::global;
  const auto r = sbm_transport(f.ds, f.wl, estimate_with(acc), cfg);
  REQUIRE(r.decisions.size() == 1);
  CHECK_FALSE(r.decisions[0].lf_index.has_value());
  CHECK(r.decisions[0].src_group == 1);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(r.new_votes.votes.col(j).head(30) == f.wl.votes.col(j).head(30));
  CHECK(r.new_votes.votes.bottomRows(30) == f.wl.votes.topRows(30));
}

TEST_CASE("linear transport repairs a shifted labeler") {
  // Group 1 = group 0 shifted by (10, 0). LF 0 is y-accurate only near the origin.
  std::mt19937_64 rng(13);
  const Eigen::Index half = 3000;
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  GroupedDataset ds;
  ds.features.resize(2 * half, 2);
  ds.groups.resize(2 * half);
  IntVector y(2 * half);
  VoteMatrix v(2 * half, 4);
  for (Eigen::Index i = 0; i < 2 * half; ++i) {
    const double z0 = N(rng), z1 = N(rng);
    const int g = i < half ? 0 : 1;
    ds.groups[i] = g;
    ds.features(i, 0) = z0 + 10.0 * g;
    ds.features(i, 1) = z1;
    y[i] = z0 + z1 >= 0 ? 1 : -1;
    const int rule = ds.features(i, 0) + ds.features(i, 1) >= 0 ? 1 : -1;
    v(i, 0) = g == 0 ? rule : (U(rng) < 0.5 ? 1 : -1);
    v(i, 1) = U(rng) < 0.8 ? y[i] : -y[i];
    v(i, 2) = U(rng) < 0.75 ? y[i] : -y[i];
    v(i, 3) = U(rng) < 0.7 ? y[i] : -y[i];
  }
  const WeakLabelMatrix wl(v);
  auto accuracy = [&](const WeakLabelMatrix& w, int g) {
    double c = 0, n = 0;
    for (Eigen::Index i = 0; i < w.n(); ++i)
      if (ds.groups[i] == g) {
        c += w(i, 0) == y[i];
        ++n;
      }
    return c / n;
  };
  const auto est = estimate::estimate_accuracies(wl, ds.groups);
  CHECK(est.per_lf_group(0, 0) > est.per_lf_group(0, 1));
  PipelineConfig cfg;
  const auto r = sbm_transport(ds, wl, est, cfg);
  CHECK(accuracy(wl, 1) == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(accuracy(r.new_votes, 1) - accuracy(wl, 0)) <= 0.05);
  CHECK(r.new_votes.votes.col(0).head(half) == wl.votes.col(0).head(half));
}

TEST_CASE("transport errors") {
  auto f = mirrored(2);
  Matrix acc(3, 2);
  acc << 0.9, 0.3, 0.9, 0.3, 0.9, 0.3;
  PipelineConfig cfg;
  cfg.knn_k = 3;
  CHECK_THROWS_AS(sbm_transport(f.ds, f.wl, estimate_with(acc), cfg), InputError);
  cfg.knn_k = 1;
  // linear needs d + 1 = 3 rows per group
  try {
    sbm_transport(f.ds, f.wl, estimate_with(acc), cfg);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("lf 0") != std::string::npos);
  }
}

TEST_CASE("repeated runs are identical") {
  auto f = mirrored(50);
  Matrix acc(3, 2);
  acc << 0.9, 0.3, 0.2, 0.8, 0.7, 0.1;
  PipelineConfig cfg;
  cfg.ot_type = OtType::sinkhorn;
  cfg.sinkhorn_max_iter = 100;
  const auto a = sbm_transport(f.ds, f.wl, estimate_with(acc), cfg);
  const auto b = sbm_transport(f.ds, f.wl, estimate_with(acc), cfg);
  CHECK(a.new_votes.votes == b.new_votes.votes);
}
