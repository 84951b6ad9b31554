#pragma once

#include "sbm/core.hpp"

namespace sbm::labelmodel {

enum class ParamSource { triplet, uniform };

// Conditionally independent label model: P(y | lambda) with log-odds
//   theta_y + 2 * sum_j w_j lambda_j   over the non-abstaining LFs,
// where w_j = atanh(a_j) and theta_y = logit(class balance).
struct LabelModelParams {
  Vector weights;
  double prior = 0.0;
  ParamSource source = ParamSource::triplet;
};

inline constexpr double kAccuracyClamp = 0.999;

LabelModelParams fit_label_model(const Vector& accuracies, double class_balance,
                                 ParamSource source = ParamSource::triplet);
LabelModelParams fit_label_model(const AccuracyEstimate& est, double class_balance);

struct Pseudolabels {
  Vector prob;       // P(y = +1 | lambda)
  IntVector labels;  // sign(prob - 1/2), ties -> +1
};

Pseudolabels infer_pseudolabels(const LabelModelParams& params, const WeakLabelMatrix& wl);

double sigmoid(double z);
int hard_label(double prob);

struct TrainOptions {
  int epochs = 500;
  double lr = 0.5;
  double l2 = 1e-4;
  bool hard_labels = false;
};

struct EndModel {
  Vector coefficients;  // d weights followed by the intercept
  int iterations = 0;
  double final_objective = 0.0;
  double learning_rate = 0.0;
};

// Mean cross-entropy against soft targets plus (l2 / 2) * ||w||^2; the
// intercept is not penalized.
double end_model_objective(const Matrix& X, const Vector& targets, double l2, const Vector& coefficients);
Vector end_model_gradient(const Matrix& X, const Vector& targets, double l2, const Vector& coefficients);

// Full-batch gradient descent from zero.
EndModel train_end_model(const Matrix& X, const Vector& pseudo_probs, const TrainOptions& opt);

struct Prediction {
  Vector prob;
  IntVector labels;
};

Prediction predict(const EndModel& model, const Matrix& X);

}  // namespace sbm::labelmodel
