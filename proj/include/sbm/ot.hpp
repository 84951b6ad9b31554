#pragma once

#include "sbm/core.hpp"

#include <vector>

namespace sbm::ot {

struct GaussianMoments {
  Vector mu;
  Matrix sigma;  // symmetrized on construction
  Eigen::Index n = 0;
};

// x -> A x + b
struct MongeMap {
  Matrix A;
  Vector b;
};

struct TransportPlan {
  Matrix T;
  double eta = 1.0;
  int iterations_run = 0;
  bool converged = false;
  double max_violation = 0.0;  // max over row and column marginal residuals
  // Negated entropic dual objective after each iteration; non-increasing.
  std::vector<double> objective_trace;
};

struct SpectralSummary {
  double effective_rank = 0.0;  // trace / lambda_max
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double trace = 0.0;
};

// Symmetric PSD square root via eigendecomposition. Small negative
// eigenvalues (>= -1e-6 relative) are clamped to zero.
Matrix psd_sqrt(const Matrix& S);

// Sample mean and unbiased covariance plus ridge * I.
GaussianMoments fit_moments(const Matrix& X, double ridge);

// Closed-form Monge map between two Gaussians:
//   A = S^{-1/2} (S^{1/2} T S^{1/2})^{1/2} S^{-1/2},  b = mu_t - A mu_s.
MongeMap linear_monge(const GaussianMoments& src, const GaussianMoments& dst);

Matrix apply_monge(const MongeMap& map, const Matrix& X);

// Pairwise squared Euclidean cost. With CostScaling::median the matrix is
// divided by its median entry (falling back to the mean, then to no scaling,
// when that is zero).
Matrix cost_matrix(const Matrix& X_src, const Matrix& X_dst, CostScaling scaling);

struct SinkhornOptions {
  double eta = 1.0;
  int max_iter = 10;
  double tol = 1e-9;
};

// Entropic OT by alternating scaling of K = exp(-M / eta):
//   u = a / (K v),  v = b / (K^T u),  T = diag(u) K diag(v).
TransportPlan sinkhorn_plan(const Matrix& M, const Vector& a, const Vector& b, const SinkhornOptions& opt);

Vector uniform_marginal(Eigen::Index n);

// Row-normalized barycentric projection diag(T 1)^{-1} T X_dst.
Matrix barycentric_map(const TransportPlan& plan, const Matrix& X_dst);

SpectralSummary spectral_summary(const Matrix& S);

}  // namespace sbm::ot
