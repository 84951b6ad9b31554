#include "sbm/synthetic.hpp"

#include "sbm/labelmodel.hpp"
#include "sbm/ot.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace sbm::synthetic {

AffineMap AffineMap::identity(Eigen::Index d) { return {Matrix::Identity(d, d), Vector::Zero(d)}; }

AffineMap AffineMap::translation(const Vector& offset) {
  return {Matrix::Identity(offset.size(), offset.size()), offset};
}

Matrix AffineMap::apply(const Matrix& Z) const {
  Matrix X = Z * linear.transpose();
  X.rowwise() += offset.transpose();
  return X;
}

AffineMap AffineMap::inverse() const {
  Eigen::FullPivLU<Matrix> lu(linear);
  if (!lu.isInvertible()) throw InputError("group transform is not invertible");
  AffineMap inv;
  inv.linear = lu.inverse();
  inv.offset = -inv.linear * offset;
  return inv;
}

SyntheticModel SyntheticModel::standard(Eigen::Index d, double theta0) {
  SyntheticModel m;
  m.theta0 = theta0;
  m.center = Vector::Zero(d);
  m.latent_mean = Vector::Zero(d);
  m.latent_cov = Matrix::Identity(d, d);
  m.group_transforms = {AffineMap::identity(d), AffineMap::identity(d)};
  return m;
}

double phi(const Vector& x, const Vector& center) { return 1.0 / (1.0 + (x - center).norm()); }

double accuracy_prob(const Vector& x, const SyntheticModel& model) {
  return labelmodel::sigmoid(2.0 * model.theta0 * phi(x, model.center));
}

Vector accuracy_prob_rows(const Matrix& X, const SyntheticModel& model) {
  const Vector dist = (X.rowwise() - model.center.transpose()).rowwise().norm();
  Vector p(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) p[i] = labelmodel::sigmoid(2.0 * model.theta0 / (1.0 + dist[i]));
  return p;
}

Matrix sample_latent(const SyntheticModel& model, Eigen::Index n, std::uint64_t seed) {
  const Eigen::Index d = model.dim();
  if (model.latent_mean.size() != d || model.latent_cov.rows() != d || model.latent_cov.cols() != d)
    throw InputError("synthetic model: latent moments do not match the center dimension");
  const Matrix root = ot::psd_sqrt(model.latent_cov);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix eps(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) eps(i, k) = normal(rng);
  Matrix Z = eps * root;
  Z.rowwise() += model.latent_mean.transpose();
  return Z;
}

namespace {

int flip_with(double keep_prob, int y, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(keep_prob);
  return keep(rng) ? y : -y;
}

}  // namespace

SyntheticSample sample_labeled(const SyntheticModel& model, Eigen::Index n, std::uint64_t seed,
                               const std::vector<double>& extra_lf_accuracy) {
  if (n < 1) throw InputError("sample_labeled: n must be positive");
  if (!(model.theta0 >= 0.0)) throw InputError("sample_labeled: theta0 must be nonnegative");
  const Eigen::Index d = model.dim();

  SyntheticSample s;
  s.latent = sample_latent(model, n, derive_seed(seed, 0));
  const auto n0 = static_cast<Eigen::Index>(std::llround(static_cast<double>(n) * (1.0 - model.group1_fraction)));

  s.ds.groups.resize(n);
  s.ds.features.resize(n, d);
  for (int g = 0; g < kNumGroups; ++g) {
    const Eigen::Index begin = g == 0 ? 0 : n0;
    const Eigen::Index count = g == 0 ? n0 : n - n0;
    if (count == 0) continue;
    s.ds.groups.segment(begin, count).setConstant(g);
    s.ds.features.middleRows(begin, count) = model.group_transforms[g].apply(s.latent.middleRows(begin, count));
  }

  std::mt19937_64 label_rng(derive_seed(seed, 1));
  std::bernoulli_distribution positive(model.label_balance);
  IntVector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (model.label_direction) {
      const double score = model.label_direction->dot(s.latent.row(i).transpose() - model.latent_mean) + model.label_offset;
      y[i] = score >= 0.0 ? 1 : -1;
    } else {
      y[i] = positive(label_rng) ? 1 : -1;
    }
  }
  s.ds.labels = y;

  const auto m = static_cast<Eigen::Index>(1 + extra_lf_accuracy.size());
  VoteMatrix votes(n, m);
  const Vector p = accuracy_prob_rows(s.ds.features, model);
  std::mt19937_64 lf_rng(derive_seed(seed, 2));
  for (Eigen::Index i = 0; i < n; ++i) votes(i, 0) = flip_with(p[i], y[i], lf_rng);
  for (std::size_t e = 0; e < extra_lf_accuracy.size(); ++e) {
    std::mt19937_64 rng(derive_seed(seed, 3 + e));
    const auto col = static_cast<Eigen::Index>(e + 1);
    for (Eigen::Index i = 0; i < n; ++i) votes(i, col) = flip_with(extra_lf_accuracy[e], y[i], rng);
  }
  s.wl = WeakLabelMatrix(std::move(votes));
  return s;
}

namespace {

bool non_increasing(const std::vector<double>& v, double slack) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + slack) return false;
  return true;
}

double std_error(const Vector& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  const double var = (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

TheoremReport theorem1_sweep(const SyntheticModel& model, const std::vector<double>& shifts,
                             const Theorem1Options& opt) {
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    if (shifts[i] < 0.0) throw InputError("theorem1_sweep: shifts must be nonnegative");
    if (i > 0 && shifts[i] < shifts[i - 1]) throw InputError("theorem1_sweep: shifts must be increasing");
  }
  const Eigen::Index d = model.dim();
  TheoremReport r;
  r.name = "theorem1";
  auto& sampled = r.diagnostics["sampled"];
  auto& sampled_se = r.diagnostics["sampled_std_error"];
  auto& mean_distance = r.diagnostics["mean_distance_to_center"];

  for (std::size_t i = 0; i < shifts.size(); ++i) {
    SyntheticModel shifted = model;
    Vector offset = Vector::Zero(d);
    offset[0] = shifts[i];
    shifted.group_transforms[1] = AffineMap::translation(offset);
    shifted.group1_fraction = 1.0;
    const auto s = sample_labeled(shifted, opt.n, derive_seed(opt.seed, i));

    const Vector p = accuracy_prob_rows(s.ds.features, shifted);
    Vector agree(opt.n);
    for (Eigen::Index k = 0; k < opt.n; ++k) agree[k] = s.wl(k, 0) == (*s.ds.labels)[k] ? 1.0 : 0.0;

    r.sweep_values.push_back(shifts[i]);
    r.measured.push_back(p.mean());
    r.std_error.push_back(std_error(p));
    r.bound_or_limit.push_back(0.5);
    sampled.push_back(agree.mean());
    sampled_se.push_back(std_error(agree));
    mean_distance.push_back((s.ds.features.rowwise() - model.center.transpose()).rowwise().norm().mean());
  }

  r.passed = !r.measured.empty() && non_increasing(r.measured, opt.monotone_slack) &&
             non_increasing(sampled, opt.monotone_slack) && std::abs(r.measured.back() - 0.5) <= opt.limit_tol &&
             std::abs(sampled.back() - 0.5) <= opt.limit_tol;
  return r;
}

LipschitzResult lipschitz_check(const SyntheticModel& model, long trials, std::uint64_t seed) {
  if (trials < 1) throw InputError("lipschitz_check: trials must be positive");
  const Eigen::Index d = model.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scales[] = {0.1, 1.0, 10.0};

  LipschitzResult res;
  res.theta0 = model.theta0;
  res.bound = 4.0 * model.theta0;
  Vector x1(d), x2(d);
  for (long t = 0; t < trials; ++t) {
    const double spread = scales[t % 3];
    const double step = (t / 3) % 2 == 0 ? spread : 1e-4;
    for (Eigen::Index k = 0; k < d; ++k) x1[k] = model.center[k] + spread * normal(rng);
    for (Eigen::Index k = 0; k < d; ++k) x2[k] = x1[k] + step * normal(rng);
    const double dx = (x1 - x2).norm();
    if (dx == 0.0) continue;
    const double ratio = std::abs(accuracy_prob(x1, model) - accuracy_prob(x2, model)) / dx;
    ++res.pairs;
    res.max_ratio = std::max(res.max_ratio, ratio);
    // The gradient bound is strict for theta0 > 0.
    if (ratio > res.bound || (res.bound > 0.0 && ratio == res.bound)) ++res.violations;
  }
  res.passed = res.violations == 0;
  return res;
}

TheoremReport theorem2_sweep(const SyntheticModel& model, const std::vector<Eigen::Index>& sample_sizes,
                             const Theorem2Options& opt) {
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] < 2) throw InputError("theorem2_sweep: sample sizes must be at least 2");
    if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1])
      throw InputError("theorem2_sweep: sample sizes must be increasing");
  }
  const AffineMap& g0 = model.group_transforms[0];
  const AffineMap& g1 = model.group_transforms[1];
  g1.inverse();  // rejects a singular g1

  auto population = [&](const AffineMap& g, double ridge) {
    ot::GaussianMoments mom;
    mom.mu = g.linear * model.latent_mean + g.offset;
    mom.sigma = g.linear * model.latent_cov * g.linear.transpose();
    mom.sigma = 0.5 * (mom.sigma + mom.sigma.transpose());
    mom.sigma.diagonal().array() += ridge;
    return mom;
  };

  // True map h: the closed-form Monge map from the group-1 law to the group-0 law. It equals g0 o g1^{-1}
  // only when that composition is symmetric positive definite; the fitted map always converges to this one.
  const ot::MongeMap h = ot::linear_monge(population(g1, 0.0), population(g0, 0.0));

  TheoremReport r;
  r.name = "theorem2";
  auto& rhs_se = r.diagnostics["rhs_std_error"];
  auto& transport_error = r.diagnostics["transport_error"];
  auto& rank0 = r.diagnostics["effective_rank_sigma0"];
  auto& rank1 = r.diagnostics["effective_rank_sigma1"];
  auto& trace1 = r.diagnostics["trace_sigma1"];
  auto& lmax1 = r.diagnostics["lambda_max_sigma1"];
  auto& tau = r.diagnostics["tau_t1"];
  auto& rate = r.diagnostics["sqrt_tau_r1"];

  bool inequality_holds = true;
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    const Eigen::Index n = sample_sizes[i];
    const std::uint64_t base = derive_seed(opt.seed, i);
    ot::GaussianMoments m0, m1;
    if (opt.analytic_moments) {
      m0 = population(g0, opt.ridge);
      m1 = population(g1, opt.ridge);
    } else {
      m0 = ot::fit_moments(g0.apply(sample_latent(model, n, derive_seed(base, 0))), opt.ridge);
      m1 = ot::fit_moments(g1.apply(sample_latent(model, n, derive_seed(base, 1))), opt.ridge);
    }
    const ot::MongeMap h_hat = ot::linear_monge(m1, m0);

    const Matrix Z = sample_latent(model, opt.n_eval, derive_seed(base, 2));
    const Matrix X1 = g1.apply(Z);
    const Matrix target = ot::apply_monge(h, X1);
    const Matrix mapped = ot::apply_monge(h_hat, X1);

    const Vector p_true = accuracy_prob_rows(g0.apply(Z), model);
    const Vector p_hat = accuracy_prob_rows(mapped, model);
    const Vector diff = p_true - p_hat;
    const Vector dist = (target - mapped).rowwise().norm();

    const double gap = std::abs(diff.mean());
    const double rhs = 4.0 * model.theta0 * dist.mean();
    const double se = std::sqrt(std::pow(std_error(diff), 2) + std::pow(4.0 * model.theta0 * std_error(dist), 2));
    // 1e-12 absorbs roundoff when both sides are exactly zero (analytic moments).
    if (gap > rhs + 3.0 * se + 1e-12) inequality_holds = false;

    r.sweep_values.push_back(static_cast<double>(n));
    r.measured.push_back(gap);
    r.bound_or_limit.push_back(rhs);
    r.std_error.push_back(std_error(diff));
    rhs_se.push_back(4.0 * model.theta0 * std_error(dist));
    transport_error.push_back(dist.mean());

    const auto s0 = ot::spectral_summary(m0.sigma);
    const auto s1 = ot::spectral_summary(m1.sigma);
    rank0.push_back(s0.effective_rank);
    rank1.push_back(s1.effective_rank);
    trace1.push_back(s1.trace);
    lmax1.push_back(s1.lambda_max);
    const double nn = static_cast<double>(n);
    const double t = 1.0;
    const double tau_n = std::max({s0.effective_rank / nn, s1.effective_rank / nn, t / nn, t * t / (nn * nn)});
    tau.push_back(tau_n);
    rate.push_back(std::sqrt(tau_n * s1.effective_rank));
  }

  bool decreasing = true;
  bool all_zero = true;
  for (std::size_t i = 0; i < transport_error.size(); ++i) {
    if (transport_error[i] > 1e-12) all_zero = false;
    if (i > 0 && !(transport_error[i] < transport_error[i - 1])) decreasing = false;
  }
  r.passed = !r.measured.empty() && inequality_holds && (decreasing || all_zero);
  return r;
}

}  // namespace sbm::synthetic
