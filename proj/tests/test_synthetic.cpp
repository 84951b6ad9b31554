#include "sbm/synthetic.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace sbm;
using namespace sbm::synthetic;

TEST_CASE("phi") {
  const Vector c = Vector::Zero(2);
  CHECK(phi(c, c) == 1.0);
  CHECK(phi(Vector::Unit(2, 0), c) == 0.5);
  double last = 1.0;
  for (double r : {1.0, 10.0, 100.0, 1e6}) {
    const double v = phi(Vector::Unit(2, 1) * r, c);
    CHECK(v < last);
    last = v;
  }
}

TEST_CASE("accuracy_prob") {
  auto m = SyntheticModel::standard(2, 1.0);
  CHECK(accuracy_prob(m.center, m) == doctest::Approx(oracle::logistic(2.0)));
  CHECK(accuracy_prob(m.center, m) == doctest::Approx(0.8808).epsilon(1e-4));
  CHECK(std::abs(accuracy_prob(Vector::Unit(2, 0) * 1e6, m) - 0.5) <= 1e-5);
  m.theta0 = 0.0;
  CHECK(accuracy_prob(Vector::Constant(2, 3.0), m) == 0.5);
  m.theta0 = 2.0;
  double last = 1.0;
  for (double r = 0.0; r < 20.0; r += 0.5) {
    const double p = accuracy_prob(Vector::Unit(2, 0) * r, m);
    CHECK(p > 0.5);
    CHECK(p <= last);
    last = p;
  }
}

TEST_CASE("sampler") {
  auto m = SyntheticModel::standard(2, 1.0);
  SUBCASE("deterministic per seed") {
    const auto a = sample_labeled(m, 500, 7, {0.8});
    const auto b = sample_labeled(m, 500, 7, {0.8});
    CHECK(a.ds.features == b.ds.features);
    CHECK(a.wl.votes == b.wl.votes);
    CHECK(*a.ds.labels == *b.ds.labels);
    const auto c = sample_labeled(m, 500, 8, {0.8});
    CHECK(c.wl.votes != a.wl.votes);
  }
  SUBCASE("theta0 zero is a coin") {
    m.theta0 = 0.0;
    const Eigen::Index n = 100000;
    const auto s = sample_labeled(m, n, 1);
    double agree = 0;
    for (Eigen::Index i = 0; i < n; ++i) agree += s.wl(i, 0) == (*s.ds.labels)[i];
    CHECK(std::abs(agree / n - 0.5) <= 3.0 * std::sqrt(0.25 / n));
  }
  SUBCASE("saturated labeler at the center") {
    m.theta0 = 50.0;
    m.latent_cov *= 1e-8;
    const auto s = sample_labeled(m, 2000, 2);
    CHECK(s.wl.votes.col(0) == *s.ds.labels);
  }
  SUBCASE("identical transforms give indistinguishable groups") {
    const Eigen::Index n = 100000;
    const auto s = sample_labeled(m, n, 3);
    double c[2] = {0, 0}, t[2] = {0, 0};
    for (Eigen::Index i = 0; i < n; ++i) {
      const int g = s.ds.groups[i];
      c[g] += s.wl(i, 0) == (*s.ds.labels)[i];
      t[g] += 1;
    }
    const double p0 = c[0] / t[0], p1 = c[1] / t[1], p = (c[0] + c[1]) / n;
    const double z = (p0 - p1) / std::sqrt(p * (1 - p) * (1 / t[0] + 1 / t[1]));
    CHECK(std::abs(z) < 4.0);
  }
  SUBCASE("extra LFs have constant accuracy") {
    const Eigen::Index n = 50000;
    const auto s = sample_labeled(m, n, 4, {0.7});
    double agree = 0;
    for (Eigen::Index i = 0; i < n; ++i) agree += s.wl(i, 1) == (*s.ds.labels)[i];
    CHECK(std::abs(agree / n - 0.7) <= 4.0 * std::sqrt(0.21 / n));
  }
}

TEST_CASE("affine maps") {
  AffineMap g;
  g.linear = Matrix(2, 2);
  g.linear << 2, 1, 0, 1;
  g.offset = Vector(2);
  g.offset << 1, -1;
  const Matrix Z = Matrix::Random(5, 2);
  CHECK((g.inverse().apply(g.apply(Z)) - Z).norm() <= 1e-12);
  g.linear << 1, 1, 1, 1;
  CHECK_THROWS_AS(g.inverse(), InputError);
}

TEST_CASE("theorem 1 sweep") {
  SUBCASE("degenerate latent at the center") {
    auto m = SyntheticModel::standard(2, 5.0);
    m.latent_cov *= 1e-20;
    Theorem1Options opt;
    opt.n = 1000;
    const auto r = theorem1_sweep(m, {0.0}, opt);
    CHECK(r.measured[0] == doctest::Approx(oracle::logistic(10.0)).epsilon(1e-6));
  }
  SUBCASE("theta0 zero is exactly one half") {
    Theorem1Options opt;
    opt.n = 2000;
    const auto r = theorem1_sweep(SyntheticModel::standard(2, 0.0), {0.0, 10.0, 100.0}, opt);
    for (double v : r.measured) CHECK(v == 0.5);
  }
  SUBCASE("approaches one half") {
    Theorem1Options opt;
    opt.n = 20000;
    const auto r = theorem1_sweep(SyntheticModel::standard(2, 5.0), {0.0, 10.0, 100.0, 1000.0}, opt);
    CHECK(r.passed);
    CHECK(r.measured.size() == 4);
    CHECK(r.bound_or_limit.size() == 4);
    CHECK(r.diagnostics.at("sampled").size() == 4);
  }
  SUBCASE("bad shifts") { CHECK_THROWS_AS(theorem1_sweep(SyntheticModel::standard(2, 1.0), {1.0, 0.0}), InputError); }
}

TEST_CASE("lipschitz check") {
  for (double t : {0.5, 1.0, 3.0}) {
    const auto r = lipschitz_check(SyntheticModel::standard(3, t), 20000, 5);
    CHECK(r.passed);
    CHECK(r.max_ratio < 4.0 * t);
    CHECK(r.bound == 4.0 * t);
    CHECK(r.pairs == 20000);
  }
  // doubling theta0 doubles the bound
  CHECK(lipschitz_check(SyntheticModel::standard(3, 2.0), 10, 1).bound ==
        2.0 * lipschitz_check(SyntheticModel::standard(3, 1.0), 10, 1).bound);
}

namespace {

SyntheticModel affine_model(Eigen::Index d, double theta0) {
  auto m = SyntheticModel::standard(d, theta0);
  m.group_transforms[1].linear = Matrix::Identity(d, d) * 1.3;
  m.group_transforms[1].linear(0, 1) = 0.4;
  m.group_transforms[1].offset = Vector::Constant(d, 1.5);
  return m;
}

}  // namespace

TEST_CASE("theorem 2 sweep") {
  SUBCASE("analytic moments give zero gap") {
    Theorem2Options opt;
    opt.analytic_moments = true;
    opt.n_eval = 5000;
    const auto r = theorem2_sweep(affine_model(4, 1.0), {10, 100}, opt);
    for (double g : r.measured) CHECK(g <= 1e-10);
    CHECK(r.passed);
  }
  SUBCASE("inequality at tiny n") {
    Theorem2Options opt;
    opt.n_eval = 5000;
    const auto r = theorem2_sweep(affine_model(4, 1.0), {10}, opt);
    CHECK(r.measured[0] <= r.bound_or_limit[0] + 3.0 * r.std_error[0] + 3.0 * r.diagnostics.at("rhs_std_error")[0]);
  }
  SUBCASE("bound shrinks with n") {
    Theorem2Options opt;
    opt.n_eval = 10000;
    const auto r = theorem2_sweep(affine_model(4, 1.0), {100, 1000, 10000}, opt);
    CHECK(r.passed);
    for (std::size_t i = 1; i < r.bound_or_limit.size(); ++i) CHECK(r.bound_or_limit[i] < r.bound_or_limit[i - 1]);
    const auto& tr = r.diagnostics.at("trace_sigma1");
    const auto& lm = r.diagnostics.at("lambda_max_sigma1");
    const auto& rk = r.diagnostics.at("effective_rank_sigma1");
    for (std::size_t i = 0; i < rk.size(); ++i) CHECK(std::abs(rk[i] - tr[i] / lm[i]) <= 1e-10);
  }
  SUBCASE("singular g1") {
    auto m = affine_model(2, 1.0);
    m.group_transforms[1].linear.setZero();
    CHECK_THROWS_AS(theorem2_sweep(m, {10}), InputError);
  }
}
