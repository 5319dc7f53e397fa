#include "kfc/aggregation.hpp"

#include "kfc/errors.hpp"
#include "kfc/parallel.hpp"
#include "kfc/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace kfc::aggregation {

namespace {

using Array = Eigen::ArrayXXd;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Which norm the kernel profile consumes: squared l2 for the bell-shaped
// family, l1 for the triangular kernel, sup for the uniform one.
enum class NormType { L2Sq, L1, Linf };

NormType norm_type(Kernel k) {
  switch (k) {
    case Kernel::Gaussian:
    case Kernel::Epanechnikov:
    case Kernel::Biweight:
    case Kernel::Triweight:
      return NormType::L2Sq;
    case Kernel::Triangular:
      return NormType::L1;
    case Kernel::Uniform:
      return NormType::Linf;
  }
  return NormType::L2Sq;
}

// Profile on an already-scaled norm value.
double profile(Kernel k, double v) {
  switch (k) {
    case Kernel::Gaussian:
      return std::exp(-0.5 * v);
    case Kernel::Epanechnikov:
      return std::max(1.0 - v, 0.0);
    case Kernel::Biweight: {
      double t = std::max(1.0 - v, 0.0);
      return t * t;
    }
    case Kernel::Triweight: {
      double t = std::max(1.0 - v, 0.0);
      return t * t * t;
    }
    case Kernel::Triangular:
      return std::max(1.0 - v, 0.0);
    case Kernel::Uniform:
      return v < 1.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

// raw / h (or raw / h^2 for squared norms) with a 0/0 guard: h^2 underflows
// to zero at the 1e-300 sentinel.
double scale_norm(NormType t, double raw, double h) {
  if (raw <= 0.0) return 0.0;
  return t == NormType::L2Sq ? raw / (h * h) : raw / h;
}

double raw_norm(NormType t, const Vector& diff) {
  switch (t) {
    case NormType::L2Sq: return diff.squaredNorm();
    case NormType::L1: return diff.lpNorm<1>();
    case NormType::Linf: return diff.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

double kernel_weight(Kernel k, const Vector& diff, double h) {
  NormType t = norm_type(k);
  return profile(k, scale_norm(t, raw_norm(t, diff), h));
}

// All-pairs raw norms between rows of A and rows of B.
Matrix cross_norm(NormType t, const Matrix& A, const Matrix& B) {
  const Index na = A.rows(), nb = B.rows();
  Matrix R(na, nb);
  if (t == NormType::L2Sq) {
    Vector an = A.rowwise().squaredNorm();
    Vector bn = B.rowwise().squaredNorm();
    R.noalias() = -2.0 * A * B.transpose();
    R.colwise() += an;
    R.rowwise() += bn.transpose();
    R = R.cwiseMax(0.0);
  } else {
    const Index d = A.cols();
    for (Index i = 0; i < na; ++i)
      for (Index j = 0; j < nb; ++j) {
        double acc = 0.0;
        for (Index c = 0; c < d; ++c) {
          double v = std::abs(A(i, c) - B(j, c));
          acc = t == NormType::L1 ? acc + v : std::max(acc, v);
        }
        R(i, j) = acc;
      }
  }
  return R;
}

// Component disagreements between label vectors.
Matrix hamming_matrix(const Matrix& A, const Matrix& B) {
  const Index na = A.rows(), nb = B.rows();
  Matrix H(na, nb);
  for (Index i = 0; i < na; ++i)
    for (Index j = 0; j < nb; ++j) {
      int d = 0;
      for (Index t = 0; t < A.cols(); ++t)
        if (std::abs(A(i, t) - B(j, t)) > 0.5) ++d;
      H(i, j) = static_cast<double>(d);
    }
  return H;
}

int hamming(const Vector& a, const Vector& b) {
  int d = 0;
  for (Index t = 0; t < a.size(); ++t)
    if (std::abs(a[t] - b[t]) > 0.5) ++d;
  return d;
}

// out = profile(scale(raw, h)) elementwise; raw holds nonnegative norms.
void apply_kernel_array(Kernel k, const Array& raw, double h, Array& out) {
  const double h2 = h * h;
  switch (k) {
    case Kernel::Gaussian:
      out = (raw > 0.0).select(raw / h2, 0.0);
      out = (-0.5 * out).exp();
      break;
    case Kernel::Epanechnikov:
      out = (1.0 - (raw > 0.0).select(raw / h2, 0.0)).max(0.0);
      break;
    case Kernel::Biweight:
      out = (1.0 - (raw > 0.0).select(raw / h2, 0.0)).max(0.0);
      out *= out;
      break;
    case Kernel::Triweight: {
      out = (1.0 - (raw > 0.0).select(raw / h2, 0.0)).max(0.0);
      Array sq = out * out;
      out *= sq;
      break;
    }
    case Kernel::Triangular:
      out = (1.0 - (raw > 0.0).select(raw / h, 0.0)).max(0.0);
      break;
    case Kernel::Uniform:
      out = ((raw > 0.0).select(raw / h, 0.0) < 1.0).cast<double>();
      break;
  }
}

// k-fold layout with the sample permuted so folds are contiguous blocks;
// all CV scoring subtracts the query's own block from full-row sums.
struct CvPlan {
  Matrix inputs, preds;
  Vector y;
  Vector sgn; // 2y - 1 for classification
  std::vector<Index> block_begin;
  int folds = 0;
  Index n = 0;

  Index fold_of(Index pos) const {
    for (int f = 0; f < folds; ++f)
      if (pos < block_begin[static_cast<std::size_t>(f + 1)]) return f;
    return folds - 1;
  }
};

CvPlan make_plan(const AggregationSample& s, int folds, std::uint64_t seed) {
  const Index n = s.size();
  if (folds < 2 || static_cast<Index>(folds) > n)
    throw InvalidSpec("tune: need 2 <= folds <= sample size");
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  Rng rng(derive_seed({seed, 0x63766c6474ULL}));
  rng.shuffle(idx);

  // round-robin over the shuffled order, then group by fold
  std::vector<std::vector<Index>> groups(static_cast<std::size_t>(folds));
  for (std::size_t p = 0; p < idx.size(); ++p)
    groups[p % static_cast<std::size_t>(folds)].push_back(idx[p]);

  CvPlan plan;
  plan.folds = folds;
  plan.n = n;
  plan.inputs.resize(n, s.inputs.cols());
  plan.preds.resize(n, s.preds.cols());
  plan.y.resize(n);
  plan.sgn.resize(n);
  plan.block_begin.assign(1, 0);
  Index w = 0;
  for (auto& g : groups) {
    std::sort(g.begin(), g.end()); // deterministic within-fold order
    for (Index i : g) {
      plan.inputs.row(w) = s.inputs.row(i);
      plan.preds.row(w) = s.preds.row(i);
      plan.y[w] = s.outputs[i];
      plan.sgn[w] = 2.0 * s.outputs[i] - 1.0;
      ++w;
    }
    plan.block_begin.push_back(w);
  }
  return plan;
}

// Mean squared CV error of the kernel-weighted average with weights W.
double cv_mse(const Array& W, const CvPlan& plan) {
  Vector numer_tot = W.matrix() * plan.y;
  Vector denom_tot = W.matrix().rowwise().sum();
  double err = 0.0;
  for (int f = 0; f < plan.folds; ++f) {
    Index b0 = plan.block_begin[static_cast<std::size_t>(f)];
    Index len = plan.block_begin[static_cast<std::size_t>(f + 1)] - b0;
    for (Index i = b0; i < b0 + len; ++i) {
      double numer =
          numer_tot[i] - W.matrix().row(i).segment(b0, len).dot(
                             plan.y.segment(b0, len));
      double denom = denom_tot[i] - W.matrix().row(i).segment(b0, len).sum();
      double pred = denom > 0.0 ? numer / denom : 0.0;
      double r = pred - plan.y[i];
      err += r * r;
    }
  }
  return err / static_cast<double>(plan.n);
}

// CV misclassification of the signed-sum classifier with weights W.
double cv_misclass(const Array& W, const CvPlan& plan) {
  Vector tot = W.matrix() * plan.sgn;
  double err = 0.0;
  for (int f = 0; f < plan.folds; ++f) {
    Index b0 = plan.block_begin[static_cast<std::size_t>(f)];
    Index len = plan.block_begin[static_cast<std::size_t>(f + 1)] - b0;
    for (Index i = b0; i < b0 + len; ++i) {
      double s = tot[i] - W.matrix().row(i).segment(b0, len).dot(
                              plan.sgn.segment(b0, len));
      int label = s > 0.0 ? 1 : 0;
      if (label != static_cast<int>(plan.y[i])) err += 1.0;
    }
  }
  return err / static_cast<double>(plan.n);
}

// Discrete fast path for Comb2 classification: Hamming distances take only
// M+1 values, so per-query signed weights collapse to a histogram.
struct HammingHist {
  // tot(i, v): signed label mass at distance v; infold likewise restricted
  // to i's own fold.
  Matrix tot, infold;
  int maxv = 0;
};

HammingHist make_hamming_hist(const CvPlan& plan) {
  HammingHist hh;
  hh.maxv = static_cast<int>(plan.preds.cols());
  Matrix H = hamming_matrix(plan.preds, plan.preds);
  hh.tot = Matrix::Zero(plan.n, hh.maxv + 1);
  hh.infold = Matrix::Zero(plan.n, hh.maxv + 1);
  for (int f = 0; f < plan.folds; ++f) {
    Index b0 = plan.block_begin[static_cast<std::size_t>(f)];
    Index b1 = plan.block_begin[static_cast<std::size_t>(f + 1)];
    for (Index i = 0; i < plan.n; ++i)
      for (Index j = b0; j < b1; ++j) {
        int v = static_cast<int>(H(i, j));
        hh.tot(i, v) += plan.sgn[j];
        if (i >= b0 && i < b1) hh.infold(i, v) += plan.sgn[j];
      }
  }
  return hh;
}

double cv_misclass_hamming(const HammingHist& hh, const CvPlan& plan, Kernel k,
                           double h) {
  Vector ker(hh.maxv + 1);
  for (int v = 0; v <= hh.maxv; ++v)
    ker[v] = kernel_eval(k, static_cast<double>(v) / h);
  double err = 0.0;
  for (Index i = 0; i < plan.n; ++i) {
    double s = (hh.tot.row(i) - hh.infold.row(i)).dot(ker.transpose());
    int label = s > 0.0 ? 1 : 0;
    if (label != static_cast<int>(plan.y[i])) err += 1.0;
  }
  return err / static_cast<double>(plan.n);
}

// Comb1 selection thresholds: t(i, j) is the req-th smallest coordinate
// difference |m_l(X_i) - m_l(X_j)|, so point j is selected at threshold
// epsilon iff t < epsilon.
Matrix comb1_thresholds(const Matrix& preds, int req) {
  const Index n = preds.rows();
  const Index m = preds.cols();
  Matrix T(n, n);
  std::vector<double> diffs(static_cast<std::size_t>(m));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      for (Index t = 0; t < m; ++t)
        diffs[static_cast<std::size_t>(t)] = std::abs(preds(i, t) - preds(j, t));
      std::nth_element(diffs.begin(), diffs.begin() + (req - 1), diffs.end());
      T(i, j) = diffs[static_cast<std::size_t>(req - 1)];
    }
  return T;
}

int agreement_requirement(Index m, double alpha) {
  int req = static_cast<int>(std::ceil(static_cast<double>(m) * alpha - 1e-12));
  return std::clamp(req, 1, static_cast<int>(m));
}

std::vector<double> build_axis(double sentinel, double lo, double hi, int count,
                               const std::vector<double>& explicit_values) {
  std::vector<double> g;
  if (!explicit_values.empty()) {
    g = explicit_values;
  } else {
    if (count < 1) throw EmptyGrid("grid: need at least one point");
    g.push_back(sentinel);
    int rest = count - 1;
    if (rest == 1) {
      g.push_back(lo);
    } else if (rest > 1) {
      double llo = std::log(lo), lhi = std::log(hi);
      for (int i = 0; i < rest; ++i)
        g.push_back(std::exp(llo + (lhi - llo) * i / (rest - 1)));
    }
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  if (g.empty()) throw EmptyGrid("grid: no values");
  for (double v : g)
    if (!(v > 0.0)) throw EmptyGrid("grid: values must be positive");
  return g;
}

} // namespace

std::string kernel_name(Kernel k) {
  switch (k) {
    case Kernel::Uniform: return "uniform";
    case Kernel::Epanechnikov: return "epanechnikov";
    case Kernel::Gaussian: return "gaussian";
    case Kernel::Triangular: return "triangular";
    case Kernel::Biweight: return "biweight";
    case Kernel::Triweight: return "triweight";
  }
  return "gaussian";
}

Kernel kernel_from_name(const std::string& name) {
  std::string n = lower(name);
  if (n == "uniform") return Kernel::Uniform;
  if (n == "epanechnikov") return Kernel::Epanechnikov;
  if (n == "gaussian") return Kernel::Gaussian;
  if (n == "triangular") return Kernel::Triangular;
  if (n == "biweight") return Kernel::Biweight;
  if (n == "triweight") return Kernel::Triweight;
  throw InvalidSpec("unknown kernel \"" + name + "\"");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Comb1: return "comb1";
    case Method::Comb2: return "comb2";
    case Method::Comb3: return "comb3";
  }
  return "comb2";
}

Method method_from_name(const std::string& name) {
  std::string n = lower(name);
  if (n == "comb1") return Method::Comb1;
  if (n == "comb2") return Method::Comb2;
  if (n == "comb3") return Method::Comb3;
  throw InvalidSpec("unknown method \"" + name + "\" (expected comb1|comb2|comb3)");
}

double kernel_eval(Kernel k, const Vector& u) {
  NormType t = norm_type(k);
  return profile(k, raw_norm(t, u));
}

double kernel_eval(Kernel k, double u) {
  double a = std::abs(u);
  return profile(k, norm_type(k) == NormType::L2Sq ? a * a : a);
}

int comb1_classify(const AggregationSample& s, const Vector& mx) {
  if (mx.size() != s.members())
    throw DimensionMismatch("comb1_classify: prediction vector length mismatch");
  double pos = 0.0, neg = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    if ((s.preds.row(i).transpose().array() == mx.array()).all()) {
      if (s.outputs[i] > 0.5)
        pos += 1.0;
      else
        neg += 1.0;
    }
  }
  return pos > neg ? 1 : 0;
}

int comb2_classify(const AggregationSample& s, const Vector& mx, Kernel k,
                   double h) {
  if (mx.size() != s.members())
    throw DimensionMismatch("comb2_classify: prediction vector length mismatch");
  double sum = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    double dh = static_cast<double>(hamming(s.preds.row(i).transpose(), mx));
    sum += (2.0 * s.outputs[i] - 1.0) * kernel_eval(k, dh / h);
  }
  return sum > 0.0 ? 1 : 0;
}

int comb3_classify(const AggregationSample& s, const Vector& x, const Vector& mx,
                   Kernel k, double alpha_in, double beta_pred) {
  if (x.size() != s.inputs.cols())
    throw DimensionMismatch("comb3_classify: input dimension mismatch");
  if (mx.size() != s.members())
    throw DimensionMismatch("comb3_classify: prediction vector length mismatch");
  double sum = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    double w = kernel_weight(k, s.inputs.row(i).transpose() - x, alpha_in) *
               kernel_weight(k, s.preds.row(i).transpose() - mx, beta_pred);
    sum += (2.0 * s.outputs[i] - 1.0) * w;
  }
  return sum > 0.0 ? 1 : 0;
}

double comb1_regress(const AggregationSample& s, const Vector& mx, double epsilon,
                     double alpha) {
  if (mx.size() != s.members())
    throw DimensionMismatch("comb1_regress: prediction vector length mismatch");
  const int req = agreement_requirement(s.members(), alpha);
  double sum = 0.0, count = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    int agree = 0;
    for (Index t = 0; t < s.members(); ++t)
      if (std::abs(s.preds(i, t) - mx[t]) < epsilon) ++agree;
    if (agree >= req) {
      sum += s.outputs[i];
      count += 1.0;
    }
  }
  return count > 0.0 ? sum / count : 0.0; // 0/0 = 0
}

double comb2_regress(const AggregationSample& s, const Vector& mx, Kernel k,
                     double h) {
  if (mx.size() != s.members())
    throw DimensionMismatch("comb2_regress: prediction vector length mismatch");
  double numer = 0.0, denom = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    double w = kernel_weight(k, s.preds.row(i).transpose() - mx, h);
    numer += w * s.outputs[i];
    denom += w;
  }
  return denom > 0.0 ? numer / denom : 0.0;
}

double comb3_regress(const AggregationSample& s, const Vector& x, const Vector& mx,
                     Kernel k, double alpha_in, double beta_pred) {
  if (x.size() != s.inputs.cols())
    throw DimensionMismatch("comb3_regress: input dimension mismatch");
  if (mx.size() != s.members())
    throw DimensionMismatch("comb3_regress: prediction vector length mismatch");
  double numer = 0.0, denom = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    double w = kernel_weight(k, s.inputs.row(i).transpose() - x, alpha_in) *
               kernel_weight(k, s.preds.row(i).transpose() - mx, beta_pred);
    numer += w * s.outputs[i];
    denom += w;
  }
  return denom > 0.0 ? numer / denom : 0.0;
}

std::vector<double> grid_1d(const GridSpec& g) {
  return build_axis(g.sentinel, g.lo_1d, g.hi_1d, g.count_1d, g.explicit_1d);
}

std::vector<double> grid_2d_alpha(const GridSpec& g) {
  return build_axis(g.sentinel, g.lo_2d, g.hi_2d, g.count_2d_axis,
                    g.explicit_2d_alpha);
}

std::vector<double> grid_2d_beta(const GridSpec& g) {
  return build_axis(g.sentinel, g.lo_2d, g.hi_2d, g.count_2d_axis,
                    g.explicit_2d_beta);
}

AggregationConfig tune(const AggregationSample& s, Method method, Kernel kernel,
                       const GridSpec& grid, int folds, std::uint64_t seed,
                       double comb1_alpha, int jobs) {
  CvPlan plan = make_plan(s, folds, seed);
  AggregationConfig cfg;
  cfg.method = method;
  cfg.kernel = kernel;
  cfg.alpha = comb1_alpha;

  const bool classification = s.task == Task::Classification;
  const NormType nt = norm_type(kernel);

  if (method == Method::Comb1 && classification) {
    // exact-consensus vote has no smoothing parameter; report its CV error
    HammingHist hh = make_hamming_hist(plan);
    cfg.cv_error = cv_misclass_hamming(hh, plan, Kernel::Uniform, 0.5);
    return cfg;
  }

  if (method == Method::Comb1) {
    std::vector<double> eps = grid_1d(grid);
    const int req = agreement_requirement(s.members(), comb1_alpha);
    Matrix T = comb1_thresholds(plan.preds, req);
    std::vector<double> score(eps.size());
    parallel_for(eps.size(), jobs, [&](std::size_t gi) {
      Array W = (T.array() < eps[gi]).cast<double>();
      score[gi] = cv_mse(W, plan);
    });
    std::size_t best = 0;
    for (std::size_t gi = 1; gi < eps.size(); ++gi)
      if (score[gi] < score[best]) best = gi;
    cfg.epsilon = eps[best];
    cfg.cv_error = score[best];
    return cfg;
  }

  if (method == Method::Comb2) {
    std::vector<double> hs = grid_1d(grid);
    std::vector<double> score(hs.size());
    if (classification) {
      HammingHist hh = make_hamming_hist(plan);
      parallel_for(hs.size(), jobs, [&](std::size_t gi) {
        score[gi] = cv_misclass_hamming(hh, plan, kernel, hs[gi]);
      });
    } else {
      Array raw = cross_norm(nt, plan.preds, plan.preds).array();
      parallel_for(hs.size(), jobs, [&](std::size_t gi) {
        Array W;
        apply_kernel_array(kernel, raw, hs[gi], W);
        score[gi] = cv_mse(W, plan);
      });
    }
    std::size_t best = 0;
    for (std::size_t gi = 1; gi < hs.size(); ++gi)
      if (score[gi] < score[best]) best = gi;
    cfg.h = hs[best];
    cfg.cv_error = score[best];
    return cfg;
  }

  // Comb3: 2-D grid, lexicographic tie-breaking via ascending scan order
  std::vector<double> as = grid_2d_alpha(grid);
  std::vector<double> bs = grid_2d_beta(grid);
  Array raw_in = cross_norm(nt, plan.inputs, plan.inputs).array();
  Array raw_pred = cross_norm(nt, plan.preds, plan.preds).array();
  std::vector<double> score(as.size() * bs.size());
  parallel_for(as.size(), jobs, [&](std::size_t ai) {
    const double a = as[ai];
    Array wa, w;
    Array scaled_in;
    if (kernel == Kernel::Gaussian)
      scaled_in = (raw_in > 0.0).select(raw_in / (a * a), 0.0);
    else
      apply_kernel_array(kernel, raw_in, a, wa);
    for (std::size_t bi = 0; bi < bs.size(); ++bi) {
      const double b = bs[bi];
      if (kernel == Kernel::Gaussian) {
        // fold both blocks into a single exponential pass
        w = (raw_pred > 0.0).select(raw_pred / (b * b), 0.0);
        w = (-0.5 * (scaled_in + w)).exp();
      } else {
        apply_kernel_array(kernel, raw_pred, b, w);
        w *= wa;
      }
      score[ai * bs.size() + bi] =
          classification ? cv_misclass(w, plan) : cv_mse(w, plan);
    }
  });
  std::size_t best = 0;
  for (std::size_t gi = 1; gi < score.size(); ++gi)
    if (score[gi] < score[best]) best = gi;
  cfg.alpha_in = as[best / bs.size()];
  cfg.beta_pred = bs[best % bs.size()];
  cfg.cv_error = score[best];
  return cfg;
}

Vector predict_batch(const AggregationSample& s, const AggregationConfig& cfg,
                     const Matrix& query_inputs, const Matrix& query_preds) {
  if (query_preds.cols() != s.members())
    throw DimensionMismatch("predict_batch: prediction vector length mismatch");
  const Index nq = query_preds.rows();
  Vector out(nq);
  const bool classification = s.task == Task::Classification;

  if (cfg.method == Method::Comb1) {
    for (Index q = 0; q < nq; ++q)
      out[q] = classification
                   ? static_cast<double>(
                         comb1_classify(s, query_preds.row(q).transpose()))
                   : comb1_regress(s, query_preds.row(q).transpose(),
                                   cfg.epsilon, cfg.alpha);
    return out;
  }

  if (cfg.method == Method::Comb2) {
    for (Index q = 0; q < nq; ++q)
      out[q] = classification
                   ? static_cast<double>(comb2_classify(
                         s, query_preds.row(q).transpose(), cfg.kernel, cfg.h))
                   : comb2_regress(s, query_preds.row(q).transpose(), cfg.kernel,
                                   cfg.h);
    return out;
  }

  if (query_inputs.cols() != s.inputs.cols())
    throw DimensionMismatch("predict_batch: input dimension mismatch");
  for (Index q = 0; q < nq; ++q)
    out[q] = classification
                 ? static_cast<double>(comb3_classify(
                       s, query_inputs.row(q).transpose(),
                       query_preds.row(q).transpose(), cfg.kernel, cfg.alpha_in,
                       cfg.beta_pred))
                 : comb3_regress(s, query_inputs.row(q).transpose(),
                                 query_preds.row(q).transpose(), cfg.kernel,
                                 cfg.alpha_in, cfg.beta_pred);
  return out;
}

} // namespace kfc::aggregation
