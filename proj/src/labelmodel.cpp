#include "sbm/labelmodel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sbm::labelmodel {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

int hard_label(double prob) { return prob >= 0.5 ? 1 : -1; }

LabelModelParams fit_label_model(const Vector& accuracies, double class_balance, ParamSource source) {
  if (!(class_balance > 0.0 && class_balance < 1.0))
    throw InputError("class_balance must lie strictly between 0 and 1");
  LabelModelParams p;
  p.source = source;
  p.weights.resize(accuracies.size());
  for (Eigen::Index j = 0; j < accuracies.size(); ++j) {
    const double a = std::clamp(accuracies[j], -kAccuracyClamp, kAccuracyClamp);
    p.weights[j] = 0.5 * std::log((1.0 + a) / (1.0 - a));
  }
  p.prior = std::log(class_balance / (1.0 - class_balance));
  return p;
}

LabelModelParams fit_label_model(const AccuracyEstimate& est, double class_balance) {
  return fit_label_model(est.per_lf_global, class_balance, ParamSource::triplet);
}

Pseudolabels infer_pseudolabels(const LabelModelParams& params, const WeakLabelMatrix& wl) {
  require_valid(wl);
  if (params.weights.size() != wl.m()) throw InputError("label model has a different number of LFs than the votes");
  Pseudolabels out;
  out.prob.resize(wl.n());
  out.labels.resize(wl.n());
  for (Eigen::Index i = 0; i < wl.n(); ++i) {
    double score = 0.5 * params.prior;
    for (Eigen::Index j = 0; j < wl.m(); ++j) score += params.weights[j] * wl(i, j);
    out.prob[i] = sigmoid(2.0 * score);
    out.labels[i] = hard_label(out.prob[i]);
  }
  return out;
}

namespace {

void check_shapes(const Matrix& X, const Vector& targets, const Vector& coefficients) {
  if (targets.size() != X.rows()) throw InputError("end model: targets length does not match rows");
  if (coefficients.size() != X.cols() + 1) throw InputError("end model: coefficient length must be d + 1");
}

// log(1 + exp(z)) without overflow
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Vector logits(const Matrix& X, const Vector& coefficients) {
  const Eigen::Index d = X.cols();
  return (X * coefficients.head(d)).array() + coefficients[d];
}

}  // namespace

double end_model_objective(const Matrix& X, const Vector& targets, double l2, const Vector& coefficients) {
  check_shapes(X, targets, coefficients);
  const Vector z = logits(X, coefficients);
  double loss = 0.0;
  // -t log s(z) - (1 - t) log(1 - s(z)) = softplus(z) - t z
  for (Eigen::Index i = 0; i < z.size(); ++i) loss += softplus(z[i]) - targets[i] * z[i];
  loss /= static_cast<double>(std::max<Eigen::Index>(X.rows(), 1));
  return loss + 0.5 * l2 * coefficients.head(X.cols()).squaredNorm();
}

Vector end_model_gradient(const Matrix& X, const Vector& targets, double l2, const Vector& coefficients) {
  check_shapes(X, targets, coefficients);
  const Eigen::Index d = X.cols();
  const Vector z = logits(X, coefficients);
  Vector residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) residual[i] = sigmoid(z[i]) - targets[i];
  const double inv_n = 1.0 / static_cast<double>(std::max<Eigen::Index>(X.rows(), 1));
  Vector grad(d + 1);
  grad.head(d) = inv_n * (X.transpose() * residual) + l2 * coefficients.head(d);
  grad[d] = inv_n * residual.sum();
  return grad;
}

EndModel train_end_model(const Matrix& X, const Vector& pseudo_probs, const TrainOptions& opt) {
  if (X.rows() < 1) throw InputError("train_end_model: no training rows");
  if (pseudo_probs.size() != X.rows()) throw InputError("train_end_model: pseudolabel count does not match rows");
  if (opt.epochs < 0 || !(opt.lr > 0.0) || opt.l2 < 0.0) throw InputError("train_end_model: bad options");

  Vector targets = pseudo_probs;
  if (opt.hard_labels)
    for (Eigen::Index i = 0; i < targets.size(); ++i) targets[i] = hard_label(targets[i]) > 0 ? 1.0 : 0.0;

  EndModel model;
  model.learning_rate = opt.lr;
  model.coefficients = Vector::Zero(X.cols() + 1);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    model.coefficients -= opt.lr * end_model_gradient(X, targets, opt.l2, model.coefficients);
    model.iterations = epoch + 1;
    if (!model.coefficients.allFinite()) {
      std::ostringstream msg;
      msg << "train_end_model: coefficients became non-finite at epoch " << epoch << " (lr = " << opt.lr << ")";
      throw NumericalError(msg.str());
    }
  }
  model.final_objective = end_model_objective(X, targets, opt.l2, model.coefficients);
  if (!std::isfinite(model.final_objective)) {
    std::ostringstream msg;
    msg << "train_end_model: non-finite objective after " << model.iterations << " epochs (lr = " << opt.lr << ")";
    throw NumericalError(msg.str());
  }
  return model;
}

Prediction predict(const EndModel& model, const Matrix& X) {
  if (model.coefficients.size() != X.cols() + 1) {
    std::ostringstream msg;
    msg << "predict: model expects " << model.coefficients.size() - 1 << " features, got " << X.cols();
    throw InputError(msg.str());
  }
  Prediction p;
  const Vector z = logits(X, model.coefficients);
  p.prob.resize(z.size());
  p.labels.resize(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    p.prob[i] = sigmoid(z[i]);
    p.labels[i] = hard_label(p.prob[i]);
  }
  return p;
}

}  // namespace sbm::labelmodel
