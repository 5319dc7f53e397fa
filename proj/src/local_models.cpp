#include "kfc/local_models.hpp"

#include "kfc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace kfc::local_models {

namespace {

constexpr double kRateClamp = 1e-6;

double bernoulli_loglik(const Matrix& X, const std::vector<int>& y,
                        double b0, const Vector& w) {
  double ll = 0.0;
  for (Index i = 0; i < X.rows(); ++i) {
    double z = b0 + X.row(i).dot(w);
    // log sigma(z) = -log(1 + e^{-z}), stable on both tails
    double log_p = z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
    double log_q = z >= 0.0 ? -z - std::log1p(std::exp(-z)) : -std::log1p(std::exp(z));
    ll += y[static_cast<std::size_t>(i)] == 1 ? log_p : log_q;
  }
  return ll;
}

} // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

LinearModel fit_linear(const Matrix& X, const Vector& y) {
  if (X.rows() == 0 || X.rows() != y.size())
    throw LengthMismatch("fit_linear: X and y sizes disagree");
  LinearModel m;
  const Vector x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  Matrix Xc = X.rowwise() - x_mean.transpose();
  Vector yc = y.array() - y_mean;
  m.weights = Xc.completeOrthogonalDecomposition().solve(yc);
  m.intercept = y_mean - x_mean.dot(m.weights);
  return m;
}

LogisticModel fit_logistic(const Matrix& X, const std::vector<int>& y,
                           int max_iter, double tol, double norm_cap,
                           LogisticTrace* trace) {
  if (X.rows() == 0 || static_cast<std::size_t>(X.rows()) != y.size())
    throw LengthMismatch("fit_logistic: X and y sizes disagree");
  const Index n = X.rows();
  const Index d = X.cols();

  LogisticModel m;
  m.weights = Vector::Zero(d);

  double rate = 0.0;
  for (int yi : y) rate += yi;
  rate /= static_cast<double>(n);
  if (rate <= 0.0 || rate >= 1.0) {
    double p = std::clamp(rate, kRateClamp, 1.0 - kRateClamp);
    m.intercept = std::log(p / (1.0 - p));
    m.converged = true;
    if (trace) trace->log_likelihood.push_back(
        bernoulli_loglik(X, y, m.intercept, m.weights));
    return m;
  }

  // Newton steps on the full parameter vector (intercept first).
  Vector beta = Vector::Zero(d + 1);
  beta[0] = std::log(rate / (1.0 - rate));
  double ll = bernoulli_loglik(X, y, beta[0], beta.tail(d));
  if (trace) trace->log_likelihood.push_back(ll);

  for (int iter = 0; iter < max_iter; ++iter) {
    Vector p(n);
    for (Index i = 0; i < n; ++i)
      p[i] = sigmoid(beta[0] + X.row(i).dot(beta.tail(d)));

    Vector grad = Vector::Zero(d + 1);
    Matrix hess = Matrix::Zero(d + 1, d + 1);
    for (Index i = 0; i < n; ++i) {
      double r = static_cast<double>(y[static_cast<std::size_t>(i)]) - p[i];
      double w = std::max(p[i] * (1.0 - p[i]), 1e-10);
      Vector zi(d + 1);
      zi[0] = 1.0;
      zi.tail(d) = X.row(i).transpose();
      grad += r * zi;
      hess += w * zi * zi.transpose();
    }

    Vector step = hess.ldlt().solve(grad);
    if (!step.allFinite()) break;

    // step halving keeps the likelihood non-decreasing
    double scale = 1.0;
    Vector cand;
    double cand_ll = ll;
    bool improved = false;
    for (int half = 0; half < 30; ++half) {
      cand = beta + scale * step;
      cand_ll = bernoulli_loglik(X, y, cand[0], cand.tail(d));
      if (cand_ll >= ll) {
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;

    double change = (cand - beta).norm();
    beta = cand;
    ll = cand_ll;
    if (trace) trace->log_likelihood.push_back(ll);

    if (beta.norm() > norm_cap) {
      // likely separation: coefficients diverge without bound
      m.intercept = beta[0];
      m.weights = beta.tail(d);
      m.converged = false;
      return m;
    }
    if (change < tol) {
      m.intercept = beta[0];
      m.weights = beta.tail(d);
      m.converged = true;
      return m;
    }
  }

  m.intercept = beta[0];
  m.weights = beta.tail(d);
  m.converged = false;
  return m;
}

double predict_local(const Model& m, const Vector& x) {
  if (const auto* lin = std::get_if<LinearModel>(&m)) {
    if (x.size() != lin->weights.size())
      throw DimensionMismatch("predict_local: query dimension mismatch");
    return lin->intercept + lin->weights.dot(x);
  }
  const auto& log = std::get<LogisticModel>(m);
  if (x.size() != log.weights.size())
    throw DimensionMismatch("predict_local: query dimension mismatch");
  return sigmoid(log.intercept + log.weights.dot(x));
}

} // namespace kfc::local_models
