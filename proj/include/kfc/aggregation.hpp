#pragma once

#include "kfc/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kfc::aggregation {

// Kernel profiles over a vector argument u (already scaled by the bandwidth):
//   Gaussian      exp(-||u||_2^2 / 2)
//   Triangular    (1 - ||u||_1)+
//   Epanechnikov  (1 - ||u||_2^2)+
//   Biweight      ((1 - ||u||_2^2)+)^2
//   Triweight     ((1 - ||u||_2^2)+)^3
//   Uniform       1{||u||_inf < 1}
enum class Kernel { Uniform, Epanechnikov, Gaussian, Triangular, Biweight, Triweight };

constexpr Kernel kAllKernels[] = {Kernel::Uniform,    Kernel::Epanechnikov,
                                  Kernel::Gaussian,   Kernel::Triangular,
                                  Kernel::Biweight,   Kernel::Triweight};

enum class Method { Comb1, Comb2, Comb3 };

std::string kernel_name(Kernel k);
Kernel kernel_from_name(const std::string& name);
std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Retained points with their outputs and the M-vector of individual-estimator
// predictions m(X_i); consensus between a query and the sample is measured in
// prediction space (and input space for Comb3).
struct AggregationSample {
  Matrix inputs;  // n x d
  Matrix preds;   // n x M; entries are labels {0,1} for classification
  Vector outputs; // n
  Task task = Task::Regression;

  Index size() const { return preds.rows(); }
  Index members() const { return preds.cols(); }
};

double kernel_eval(Kernel k, const Vector& u);
double kernel_eval(Kernel k, double u); // scalar argument (Hamming distances)

// Majority vote over sample points whose prediction vector matches mx
// exactly; 1 only on a strict majority of positive labels, so empty match
// sets and ties return 0.
int comb1_classify(const AggregationSample& s, const Vector& mx);

// 1 iff sum_i (2Y_i - 1) K(d_H(m(X_i), mx) / h) > 0.
int comb2_classify(const AggregationSample& s, const Vector& mx, Kernel k, double h);

// 1 iff sum_i (2Y_i - 1) K((X_i - x)/alpha_in) K((m(X_i) - mx)/beta_pred) > 0;
// the bivariate kernel is realized as a product of two univariate-family
// kernels, one per argument block.
int comb3_classify(const AggregationSample& s, const Vector& x, const Vector& mx,
                   Kernel k, double alpha_in, double beta_pred);

// Average of Y_i over points where at least ceil(M*alpha) estimator
// predictions agree with mx within epsilon; 0 when nothing is selected.
double comb1_regress(const AggregationSample& s, const Vector& mx, double epsilon,
                     double alpha);

// Kernel-weighted average of Y_i over prediction-vector differences.
double comb2_regress(const AggregationSample& s, const Vector& mx, Kernel k,
                     double h);

// Product-kernel weighted average over input and prediction differences.
double comb3_regress(const AggregationSample& s, const Vector& x, const Vector& mx,
                     Kernel k, double alpha_in, double beta_pred);

// Bandwidth grids: a single sentinel at 1e-300 plus log-spaced values, giving
// `count_1d` points over {1e-300} U [lo_1d, hi_1d] for Comb1/Comb2 and a
// `count_2d_axis`^2 grid over {1e-300} U [lo_2d, hi_2d] per axis for Comb3.
// Explicit value lists override the generated grids (they are sorted and
// deduplicated, so a duplicated grid tunes identically to its support).
struct GridSpec {
  int count_1d = 300;
  double lo_1d = 1e-3;
  double hi_1d = 5.0;
  int count_2d_axis = 50;
  double lo_2d = 1e-3;
  double hi_2d = 10.0;
  double sentinel = 1e-300;
  std::vector<double> explicit_1d;
  std::vector<double> explicit_2d_alpha;
  std::vector<double> explicit_2d_beta;
};

std::vector<double> grid_1d(const GridSpec& g);
std::vector<double> grid_2d_alpha(const GridSpec& g);
std::vector<double> grid_2d_beta(const GridSpec& g);

struct AggregationConfig {
  Method method = Method::Comb2;
  Kernel kernel = Kernel::Gaussian;
  double h = 1.0;         // Comb2
  double epsilon = 1.0;   // Comb1 regression
  double alpha = 1.0;     // Comb1 regression: required agreement fraction
  double alpha_in = 1.0;  // Comb3 input bandwidth
  double beta_pred = 1.0; // Comb3 prediction bandwidth
  double cv_error = 0.0;  // k-fold CV score of the selected parameters
};

// Grid search by seeded k-fold cross-validation on the sample
// (misclassification for classification, mean squared error for regression).
// Ties pick the smallest parameter (lexicographically for Comb3), so the
// result is independent of evaluation order.
AggregationConfig tune(const AggregationSample& s, Method method, Kernel kernel,
                       const GridSpec& grid, int folds, std::uint64_t seed,
                       double comb1_alpha = 1.0, int jobs = 1);

// Combiner output for every query row; equals the per-query operations above.
Vector predict_batch(const AggregationSample& s, const AggregationConfig& cfg,
                     const Matrix& query_inputs, const Matrix& query_preds);

} // namespace kfc::aggregation
