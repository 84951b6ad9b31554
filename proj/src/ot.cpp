#include "sbm/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sbm::ot {

namespace {

constexpr double kSymmetryTol = 1e-8;
constexpr double kNegativeEigenTol = 1e-6;

Matrix symmetrized(const Matrix& S) { return 0.5 * (S + S.transpose()); }

void require_square(const Matrix& S, const char* who) {
  if (S.rows() != S.cols() || S.rows() == 0) {
    std::ostringstream msg;
    msg << who << ": expected a non-empty square matrix, got " << S.rows() << "x" << S.cols();
    throw InputError(msg.str());
  }
}

// Eigendecomposition of a positive definite matrix, or NumericalError.
Eigen::SelfAdjointEigenSolver<Matrix> pd_eigen(const Matrix& S, const char* name) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(S));
  if (es.info() != Eigen::Success) throw NumericalError(std::string("eigendecomposition failed for ") + name);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || lo <= hi * 1e-15) {
    std::ostringstream msg;
    msg << name << " covariance is singular (lambda_min = " << lo << ", lambda_max = " << hi
        << "); increase covariance_ridge";
    throw NumericalError(msg.str());
  }
  return es;
}

}  // namespace

Matrix psd_sqrt(const Matrix& S) {
  require_square(S, "psd_sqrt");
  if (!S.allFinite()) throw InputError("psd_sqrt: non-finite entries");
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  const double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    std::ostringstream msg;
    msg << "psd_sqrt: matrix is not symmetric (max |S - S^T| = " << asym << ")";
    throw InputError(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(S));
  if (es.info() != Eigen::Success) throw NumericalError("psd_sqrt: eigendecomposition failed");
  Vector lambda = es.eigenvalues();
  const double floor = -kNegativeEigenTol * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  if (lambda.minCoeff() < floor) {
    std::ostringstream msg;
    msg << "psd_sqrt: matrix is not positive semi-definite (lambda_min = " << lambda.minCoeff() << ")";
    throw InputError(msg.str());
  }
  lambda = lambda.cwiseMax(0.0).cwiseSqrt();
  const Matrix& V = es.eigenvectors();
  return symmetrized(V * lambda.asDiagonal() * V.transpose());
}

GaussianMoments fit_moments(const Matrix& X, double ridge) {
  if (X.rows() < 2) throw InputError("fit_moments: need at least 2 samples, got " + std::to_string(X.rows()));
  if (ridge < 0.0) throw InputError("fit_moments: ridge must be nonnegative");
  GaussianMoments g;
  g.n = X.rows();
  g.mu = X.colwise().mean().transpose();
  const Matrix centered = X.rowwise() - g.mu.transpose();
  g.sigma = (centered.transpose() * centered) / static_cast<double>(X.rows() - 1);
  g.sigma.diagonal().array() += ridge;
  g.sigma = symmetrized(g.sigma);
  return g;
}

MongeMap linear_monge(const GaussianMoments& src, const GaussianMoments& dst) {
  const auto d = src.mu.size();
  if (dst.mu.size() != d || src.sigma.rows() != d || dst.sigma.rows() != d)
    throw InputError("linear_monge: source and destination dimensions differ");

  const auto es = pd_eigen(src.sigma, "source");
  pd_eigen(dst.sigma, "destination");
  const Matrix& V = es.eigenvectors();
  const Vector root = es.eigenvalues().cwiseSqrt();
  const Matrix s_half = V * root.asDiagonal() * V.transpose();
  const Matrix s_inv_half = V * root.cwiseInverse().asDiagonal() * V.transpose();

  const Matrix middle = psd_sqrt(symmetrized(s_half * dst.sigma * s_half));
  MongeMap map;
  map.A = symmetrized(s_inv_half * middle * s_inv_half);
  map.b = dst.mu - map.A * src.mu;
  return map;
}

Matrix apply_monge(const MongeMap& map, const Matrix& X) {
  if (X.cols() != map.A.cols() || map.b.size() != map.A.rows()) {
    std::ostringstream msg;
    msg << "apply_monge: map is " << map.A.rows() << "-dimensional, points have " << X.cols() << " columns";
    throw InputError(msg.str());
  }
  Matrix out = X * map.A.transpose();
  out.rowwise() += map.b.transpose();
  return out;
}

Matrix cost_matrix(const Matrix& X_src, const Matrix& X_dst, CostScaling scaling) {
  if (X_src.cols() != X_dst.cols()) throw InputError("cost_matrix: dimension mismatch");
  Matrix M(X_src.rows(), X_dst.rows());
  for (Eigen::Index i = 0; i < X_src.rows(); ++i)
    M.row(i) = (X_dst.rowwise() - X_src.row(i)).rowwise().squaredNorm().transpose();
  if (scaling == CostScaling::raw || M.size() == 0) return M;

  std::vector<double> values(M.data(), M.data() + M.size());
  const std::size_t h = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(h), values.end());
  double scale = values[h];
  if (values.size() % 2 == 0) {
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(h));
    scale = 0.5 * (scale + lower);
  }
  if (!(scale > 0.0)) scale = M.mean();
  if (scale > 0.0) M /= scale;
  return M;
}

Vector uniform_marginal(Eigen::Index n) {
  if (n < 1) throw InputError("uniform_marginal: empty support");
  return Vector::Constant(n, 1.0 / static_cast<double>(n));
}

namespace {

void check_marginal(const Vector& w, Eigen::Index expected, const char* name) {
  if (w.size() != expected) {
    std::ostringstream msg;
    msg << "sinkhorn_plan: marginal " << name << " has length " << w.size() << ", expected " << expected;
    throw InputError(msg.str());
  }
  if (!w.allFinite() || w.minCoeff() <= 0.0)
    throw InputError(std::string("sinkhorn_plan: marginal ") + name + " must be strictly positive");
  if (std::abs(w.sum() - 1.0) > 1e-8)
    throw InputError(std::string("sinkhorn_plan: marginal ") + name + " must sum to 1");
}

}  // namespace

TransportPlan sinkhorn_plan(const Matrix& M, const Vector& a, const Vector& b, const SinkhornOptions& opt) {
  if (M.rows() == 0 || M.cols() == 0) throw InputError("sinkhorn_plan: empty cost matrix");
  if (!M.allFinite() || M.minCoeff() < 0.0) throw InputError("sinkhorn_plan: costs must be finite and nonnegative");
  if (!(opt.eta > 0.0)) throw InputError("sinkhorn_plan: eta must be positive");
  if (opt.max_iter < 1) throw InputError("sinkhorn_plan: max_iter must be positive");
  check_marginal(a, M.rows(), "a");
  check_marginal(b, M.cols(), "b");

  const Matrix K = (-M / opt.eta).array().exp().matrix();
  // Vectorized exp clamps to subnormals instead of 0, so anything below the normal range counts as underflow.
  constexpr double tiny = std::numeric_limits<double>::min();
  for (Eigen::Index i = 0; i < K.rows(); ++i)
    if (!(K.row(i).maxCoeff() >= tiny))
      throw NumericalError("sinkhorn_plan: kernel underflows to zero on source row " + std::to_string(i) +
                           "; rescale the cost or raise eta");
  for (Eigen::Index j = 0; j < K.cols(); ++j)
    if (!(K.col(j).maxCoeff() >= tiny))
      throw NumericalError("sinkhorn_plan: kernel underflows to zero on destination column " + std::to_string(j) +
                           "; rescale the cost or raise eta");

  TransportPlan plan;
  plan.eta = opt.eta;
  Vector u = Vector::Ones(K.rows());
  Vector v = Vector::Ones(K.cols());
  for (int it = 0; it < opt.max_iter; ++it) {
    const Vector Kv = K * v;
    if (!(Kv.minCoeff() > 0.0)) throw NumericalError("sinkhorn_plan: row scaling became infeasible");
    u = a.cwiseQuotient(Kv);
    const Vector Ktu = K.transpose() * u;
    if (!(Ktu.minCoeff() > 0.0)) throw NumericalError("sinkhorn_plan: column scaling became infeasible");
    v = b.cwiseQuotient(Ktu);
    if (!u.allFinite() || !v.allFinite()) throw NumericalError("sinkhorn_plan: scaling vectors overflowed");

    const Vector row_mass = u.cwiseProduct(K * v);
    const Vector col_mass = v.cwiseProduct(K.transpose() * u);
    plan.max_violation = std::max((row_mass - a).cwiseAbs().maxCoeff(), (col_mass - b).cwiseAbs().maxCoeff());
    const double dual = opt.eta * (a.dot(u.array().log().matrix()) + b.dot(v.array().log().matrix()) - row_mass.sum());
    plan.objective_trace.push_back(-dual);
    plan.iterations_run = it + 1;
    if (plan.max_violation <= opt.tol) {
      plan.converged = true;
      break;
    }
  }
  plan.T = u.asDiagonal() * K * v.asDiagonal();
  return plan;
}

Matrix barycentric_map(const TransportPlan& plan, const Matrix& X_dst) {
  if (plan.T.cols() != X_dst.rows()) throw InputError("barycentric_map: plan columns do not match destination rows");
  const Vector mass = plan.T.rowwise().sum();
  for (Eigen::Index i = 0; i < mass.size(); ++i)
    if (!(mass[i] > 0.0)) throw NumericalError("barycentric_map: zero mass on source row " + std::to_string(i));
  return mass.cwiseInverse().asDiagonal() * (plan.T * X_dst);
}

SpectralSummary spectral_summary(const Matrix& S) {
  require_square(S, "spectral_summary");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(S), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("spectral_summary: eigendecomposition failed");
  SpectralSummary s;
  s.lambda_min = es.eigenvalues().minCoeff();
  s.lambda_max = es.eigenvalues().maxCoeff();
  s.trace = S.trace();
  if (!(s.lambda_max > 0.0)) throw InputError("spectral_summary: lambda_max is zero (zero matrix)");
  s.effective_rank = s.trace / s.lambda_max;
  return s;
}

}  // namespace sbm::ot
