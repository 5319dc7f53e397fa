#pragma once

#include "kfc/types.hpp"

#include <variant>
#include <vector>

namespace kfc::local_models {

struct LinearModel {
  double intercept = 0.0;
  Vector weights;
};

struct LogisticModel {
  double intercept = 0.0;
  Vector weights;
  bool converged = false;
};

using Model = std::variant<LinearModel, LogisticModel>;

// Least squares with intercept. Weights are solved on the centered design via
// a complete orthogonal decomposition, so rank-deficient designs get the
// minimum-norm solution; a constant target therefore yields zero weights.
LinearModel fit_linear(const Matrix& X, const Vector& y);

// Trace hook for the likelihood-ascent property test.
struct LogisticTrace {
  std::vector<double> log_likelihood; // value after every accepted step
};

// Bernoulli MLE with logit link by IRLS with step halving. Degenerate cases
// never throw: a single-class target returns weights 0 and the clamped-rate
// intercept; detected separation (parameter norm over `norm_cap`) stops with
// converged = false.
LogisticModel fit_logistic(const Matrix& X, const std::vector<int>& y,
                           int max_iter = 50, double tol = 1e-8,
                           double norm_cap = 1e3,
                           LogisticTrace* trace = nullptr);

// Linear response, or sigmoid probability for a logistic model. Callers apply
// the 1/2 label threshold.
double predict_local(const Model& m, const Vector& x);

double sigmoid(double z);

} // namespace kfc::local_models
