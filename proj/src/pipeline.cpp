#include "kfc/pipeline.hpp"

#include "kfc/csv.hpp"
#include "kfc/errors.hpp"
#include "kfc/metrics.hpp"
#include "kfc/parallel.hpp"
#include "kfc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace kfc::pipeline {

namespace {

int label_of(double v) { return v > 0.5 ? 1 : 0; }

std::vector<int> to_labels(const Vector& v) {
  std::vector<int> out(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i)
    out[static_cast<std::size_t>(i)] = label_of(v[i]);
  return out;
}

// Task-appropriate local fit with the tiny-cluster rule: fewer than d+2 rows
// fall back to an intercept-only model.
local_models::Model fit_local(const Matrix& X, const Vector& y, Task task) {
  const Index n = X.rows();
  const Index d = X.cols();
  if (task == Task::Regression) {
    if (n < d + 2) {
      local_models::LinearModel m;
      m.intercept = n > 0 ? y.mean() : 0.0;
      m.weights = Vector::Zero(d);
      return m;
    }
    return local_models::fit_linear(X, y);
  }
  std::vector<int> labels = to_labels(y);
  if (n < d + 2) {
    double rate = 0.0;
    for (int l : labels) rate += l;
    rate = n > 0 ? rate / static_cast<double>(n) : 0.5;
    rate = std::clamp(rate, 1e-6, 1.0 - 1e-6);
    local_models::LogisticModel m;
    m.intercept = std::log(rate / (1.0 - rate));
    m.weights = Vector::Zero(d);
    m.converged = true;
    return m;
  }
  return local_models::fit_logistic(X, labels);
}

double eval_error(const Vector& yhat, const Vector& y, Task task) {
  if (task == Task::Regression) return metrics::rmse(yhat, y);
  return metrics::misclassification(to_labels(yhat), to_labels(y));
}

std::string error_metric_name(Task task) {
  return task == Task::Regression ? "rmse" : "misclassification";
}

Vector predict_rows(const local_models::Model& m, const Matrix& X) {
  Vector out(X.rows());
  for (Index i = 0; i < X.rows(); ++i)
    out[i] = local_models::predict_local(m, X.row(i).transpose());
  return out;
}

double sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

} // namespace

double member_predict(const ClusterModel& m, const Vector& x) {
  Vector xr = m.repair.apply_row(x);
  int c = clustering::assign(m.centroids, xr);
  return local_models::predict_local(m.locals[static_cast<std::size_t>(c)], xr);
}

Matrix prediction_vectors(const std::vector<ClusterModel>& members,
                          const Matrix& X, Task task) {
  Matrix P(X.rows(), static_cast<Index>(members.size()));
  for (std::size_t mi = 0; mi < members.size(); ++mi) {
    const ClusterModel& m = members[mi];
    Matrix R = m.repair.apply(X);
    Matrix D = bregman::divergence_matrix(m.div, R, m.centroids.centers);
    for (Index i = 0; i < X.rows(); ++i) {
      Index best = 0;
      for (Index c = 1; c < D.cols(); ++c)
        if (D(i, c) < D(i, best)) best = c;
      double v = local_models::predict_local(
          m.locals[static_cast<std::size_t>(best)], R.row(i).transpose());
      P(i, static_cast<Index>(mi)) =
          task == Task::Classification ? static_cast<double>(label_of(v)) : v;
    }
  }
  return P;
}

FittedMembers fit_members(const datagen::LabeledDataset& train,
                          const TrainConfig& cfg) {
  if (train.rows() == 0) throw EmptyResult("fit_members: empty training set");
  if (cfg.divergences.empty())
    throw InvalidSpec("fit_members: divergence list is empty");
  if (cfg.k < 1) throw InvalidK("fit_members: K must be >= 1");

  const Index n = train.rows();
  std::vector<Index> model_rows, agg_rows;
  if (cfg.split_fraction > 0.0) {
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    Rng rng(derive_seed({cfg.seed, 0x73706c6974ULL}));
    rng.shuffle(idx);
    Index n_agg = static_cast<Index>(
        std::llround(cfg.split_fraction * static_cast<double>(n)));
    n_agg = std::clamp<Index>(n_agg, 1, n - 1);
    agg_rows.assign(idx.begin(), idx.begin() + n_agg);
    model_rows.assign(idx.begin() + n_agg, idx.end());
    std::sort(agg_rows.begin(), agg_rows.end());
    std::sort(model_rows.begin(), model_rows.end());
  } else {
    model_rows.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) model_rows[static_cast<std::size_t>(i)] = i;
    agg_rows = model_rows;
  }

  auto take_rows = [&](const std::vector<Index>& rows, Matrix& X, Vector& y) {
    X.resize(static_cast<Index>(rows.size()), train.dim());
    y.resize(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      X.row(static_cast<Index>(i)) = train.X.row(rows[i]);
      y[static_cast<Index>(i)] = train.y[rows[i]];
    }
  };
  Matrix model_X, agg_X;
  Vector model_y, agg_y;
  take_rows(model_rows, model_X, model_y);
  take_rows(agg_rows, agg_X, agg_y);

  FittedMembers fm;
  fm.task = train.task;
  fm.model_rows = model_rows;
  fm.members.resize(cfg.divergences.size());
  fm.member_partitions.resize(cfg.divergences.size());

  parallel_for(cfg.divergences.size(), cfg.jobs, [&](std::size_t mi) {
    bregman::Kind div = cfg.divergences[mi];
    ClusterModel member;
    member.div = div;

    bregman::RepairResult rep = bregman::fit_repair(
        model_X, div, bregman::default_repair(div), 1e-6,
        /*zero_row_error=*/false);
    member.repair = rep.transform;

    // seeds keyed on the divergence itself, so permuting the divergence list
    // permutes members without changing any of them
    clustering::KMeansResult km = clustering::kmeans_fit(
        rep.data, cfg.k, div, cfg.restarts, cfg.max_iter,
        derive_seed({cfg.seed, 0x6b6d65616e73ULL,
                     static_cast<std::uint64_t>(div)}),
        1);
    member.centroids = km.centroids;

    member.locals.resize(static_cast<std::size_t>(cfg.k));
    for (int c = 0; c < cfg.k; ++c) {
      std::vector<Index> rows;
      for (Index i = 0; i < rep.data.rows(); ++i)
        if (km.partition.assignment[static_cast<std::size_t>(i)] == c)
          rows.push_back(i);
      if (rows.empty()) {
        // a cluster emptied by the final assignment falls back to a global
        // intercept-only model
        member.locals[static_cast<std::size_t>(c)] =
            fit_local(Matrix(0, train.dim()), Vector(0), train.task);
        if (train.task == Task::Regression)
          std::get<local_models::LinearModel>(
              member.locals[static_cast<std::size_t>(c)])
              .intercept = model_y.mean();
        continue;
      }
      Matrix Xc(static_cast<Index>(rows.size()), train.dim());
      Vector yc(static_cast<Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        Xc.row(static_cast<Index>(i)) = rep.data.row(rows[i]);
        yc[static_cast<Index>(i)] = model_y[rows[i]];
      }
      member.locals[static_cast<std::size_t>(c)] = fit_local(Xc, yc, train.task);
    }

    fm.member_partitions[mi] = km.partition.assignment;
    fm.members[mi] = std::move(member);
  });

  fm.sample.task = train.task;
  fm.sample.inputs = agg_X;
  fm.sample.outputs = agg_y;
  fm.sample.preds = prediction_vectors(fm.members, agg_X, train.task);
  return fm;
}

Ensemble kfc_train(const datagen::LabeledDataset& train, const TrainConfig& cfg) {
  FittedMembers fm = fit_members(train, cfg);
  Ensemble ens;
  ens.task = fm.task;
  ens.members = std::move(fm.members);
  ens.sample = std::move(fm.sample);
  ens.config = aggregation::tune(ens.sample, cfg.method, cfg.kernel, cfg.grid,
                                 cfg.folds, derive_seed({cfg.seed, 0x74756e65ULL}),
                                 cfg.comb1_alpha, cfg.jobs);
  return ens;
}

double kfc_predict(const Ensemble& ens, const Vector& x) {
  if (ens.members.empty()) throw EmptyResult("kfc_predict: empty ensemble");
  if (x.size() != ens.sample.inputs.cols())
    throw DimensionMismatch("kfc_predict: query has dimension " +
                            std::to_string(x.size()) + ", model expects " +
                            std::to_string(ens.sample.inputs.cols()));
  Matrix q = x.transpose();
  return kfc_predict_batch(ens, q)[0];
}

Vector kfc_predict_batch(const Ensemble& ens, const Matrix& X) {
  if (ens.members.empty()) throw EmptyResult("kfc_predict: empty ensemble");
  if (X.cols() != ens.sample.inputs.cols())
    throw DimensionMismatch("kfc_predict: queries have dimension " +
                            std::to_string(X.cols()) + ", model expects " +
                            std::to_string(ens.sample.inputs.cols()));
  Matrix preds = prediction_vectors(ens.members, X, ens.task);
  return aggregation::predict_batch(ens.sample, ens.config, X, preds);
}

namespace {

// Row schema shared by replicate and k_sweep; values are filled per rep.
struct RowSpec {
  std::string estimator;
  std::string kernel;
  std::string metric;
};

std::vector<RowSpec> make_row_specs(const BenchConfig& cfg, Task task,
                                    bool include_nmi, bool include_single) {
  std::vector<RowSpec> rows;
  const std::string err = error_metric_name(task);
  if (include_nmi)
    for (auto div : cfg.train.divergences)
      rows.push_back({bregman::kind_name(div), "", "nmi"});
  if (include_single) rows.push_back({"single", "", err});
  for (auto div : cfg.train.divergences)
    rows.push_back({bregman::kind_name(div), "", err});
  for (auto method : cfg.methods)
    for (auto kernel : cfg.kernels)
      rows.push_back({aggregation::method_name(method),
                      aggregation::kernel_name(kernel), err});
  return rows;
}

// Test errors for every estimator on one fitted replication. Order matches
// make_row_specs with the same flags.
std::vector<double> evaluate_fitted(const FittedMembers& fm,
                                    const datagen::LabeledDataset& train,
                                    const datagen::LabeledDataset& test,
                                    const BenchConfig& cfg, bool include_nmi,
                                    bool include_single, std::uint64_t tune_seed) {
  std::vector<double> vals;
  const Task task = fm.task;

  if (include_nmi) {
    std::vector<int> truth(fm.model_rows.size());
    for (std::size_t i = 0; i < fm.model_rows.size(); ++i)
      truth[i] =
          train.true_cluster[static_cast<std::size_t>(fm.model_rows[i])];
    for (std::size_t mi = 0; mi < fm.members.size(); ++mi)
      vals.push_back(metrics::nmi(fm.member_partitions[mi], truth));
  }

  if (include_single) {
    local_models::Model global = fit_local(train.X, train.y, task);
    vals.push_back(eval_error(predict_rows(global, test.X), test.y, task));
  }

  Matrix test_preds = prediction_vectors(fm.members, test.X, task);
  for (Index mi = 0; mi < test_preds.cols(); ++mi)
    vals.push_back(eval_error(test_preds.col(mi), test.y, task));

  for (auto method : cfg.methods)
    for (auto kernel : cfg.kernels) {
      aggregation::AggregationConfig ac =
          aggregation::tune(fm.sample, method, kernel, cfg.train.grid,
                            cfg.train.folds, tune_seed, cfg.train.comb1_alpha, 1);
      Vector yhat = aggregation::predict_batch(fm.sample, ac, test.X, test_preds);
      vals.push_back(eval_error(yhat, test.y, task));
    }
  return vals;
}

BenchmarkReport assemble_report(const std::vector<RowSpec>& specs,
                                const std::vector<std::vector<double>>& by_rep,
                                const std::string& group) {
  BenchmarkReport report;
  report.reps = static_cast<int>(by_rep.size());
  for (std::size_t r = 0; r < specs.size(); ++r) {
    ReportRow row;
    row.group = group;
    row.estimator = specs[r].estimator;
    row.kernel = specs[r].kernel;
    row.metric = specs[r].metric;
    row.values.reserve(by_rep.size());
    for (const auto& rep : by_rep) row.values.push_back(rep[r]);
    double mean = 0.0;
    for (double v : row.values) mean += v;
    mean /= static_cast<double>(row.values.size());
    row.mean = mean;
    row.sd = sample_sd(row.values, mean);
    report.rows.push_back(std::move(row));
  }
  return report;
}

} // namespace

BenchmarkReport replicate(const datagen::DatasetSpec& spec, const BenchConfig& cfg) {
  if (cfg.reps < 1) throw InvalidSpec("replicate: reps must be >= 1");
  const bool include_nmi = cfg.with_nmi && cfg.train.k >= 2;
  std::vector<RowSpec> specs =
      make_row_specs(cfg, spec.task, include_nmi, cfg.with_single);

  std::vector<std::vector<double>> by_rep(static_cast<std::size_t>(cfg.reps));
  parallel_for(static_cast<std::size_t>(cfg.reps), cfg.jobs, [&](std::size_t r) {
    std::uint64_t rep_seed = derive_seed({cfg.train.seed, 0x726570ULL, r});
    datagen::DatasetSpec rep_spec = spec;
    rep_spec.seed = rep_seed;
    auto [train, test] = datagen::generate(rep_spec);

    TrainConfig tc = cfg.train;
    tc.seed = rep_seed;
    tc.jobs = 1;
    FittedMembers fm = fit_members(train, tc);
    by_rep[r] = evaluate_fitted(fm, train, test, cfg, include_nmi,
                                cfg.with_single, derive_seed({rep_seed, 0x74756e65ULL}));
  });

  std::string group =
      datagen::family_name(spec.family) + "-" + task_name(spec.task);
  return assemble_report(specs, by_rep, group);
}

BenchmarkReport k_sweep(const datagen::LabeledDataset& data,
                        const std::vector<int>& k_range, const BenchConfig& cfg,
                        int n_splits, double train_fraction) {
  if (k_range.empty()) throw InvalidSpec("k_sweep: empty K range");
  if (n_splits < 1) throw InvalidSpec("k_sweep: need at least one split");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidSpec("k_sweep: train fraction must be in (0, 1)");
  const Index n = data.rows();
  Index n_train = static_cast<Index>(
      std::llround(train_fraction * static_cast<double>(n)));
  n_train = std::clamp<Index>(n_train, 1, n - 1);

  std::vector<RowSpec> specs = make_row_specs(cfg, data.task, false, false);

  BenchmarkReport report;
  report.reps = n_splits;
  std::size_t tasks = k_range.size() * static_cast<std::size_t>(n_splits);
  std::vector<std::vector<double>> results(tasks);
  parallel_for(tasks, cfg.jobs, [&](std::size_t t) {
    std::size_t ki = t / static_cast<std::size_t>(n_splits);
    std::size_t s = t % static_cast<std::size_t>(n_splits);
    int k = k_range[ki];

    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    Rng rng(derive_seed({cfg.train.seed, 0x7377656570ULL, s}));
    rng.shuffle(idx);
    std::vector<Index> tr(idx.begin(), idx.begin() + n_train);
    std::vector<Index> te(idx.begin() + n_train, idx.end());
    std::sort(tr.begin(), tr.end());
    std::sort(te.begin(), te.end());

    auto subset = [&](const std::vector<Index>& rows) {
      datagen::LabeledDataset ds;
      ds.task = data.task;
      ds.X.resize(static_cast<Index>(rows.size()), data.dim());
      ds.y.resize(static_cast<Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        ds.X.row(static_cast<Index>(i)) = data.X.row(rows[i]);
        ds.y[static_cast<Index>(i)] = data.y[rows[i]];
      }
      return ds;
    };
    datagen::LabeledDataset train = subset(tr);
    datagen::LabeledDataset test = subset(te);

    TrainConfig tc = cfg.train;
    tc.k = k;
    tc.jobs = 1;
    tc.seed = derive_seed({cfg.train.seed, 0x7377656570ULL, s,
                           static_cast<std::uint64_t>(k)});
    FittedMembers fm = fit_members(train, tc);
    results[t] = evaluate_fitted(fm, train, test, cfg, false, false,
                                 derive_seed({tc.seed, 0x74756e65ULL}));
  });

  for (std::size_t ki = 0; ki < k_range.size(); ++ki) {
    std::vector<std::vector<double>> by_split(
        results.begin() + static_cast<std::ptrdiff_t>(ki * n_splits),
        results.begin() + static_cast<std::ptrdiff_t>((ki + 1) * n_splits));
    BenchmarkReport part =
        assemble_report(specs, by_split, std::to_string(k_range[ki]));
    for (auto& row : part.rows) report.rows.push_back(std::move(row));
  }
  return report;
}

void write_report_csv(const std::string& path, const BenchmarkReport& report,
                      const std::string& group_header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << group_header << ",estimator,kernel,metric,mean,sd\n";
  for (const auto& row : report.rows) {
    out << row.group << "," << row.estimator << "," << row.kernel << ","
        << row.metric << "," << csv::format_double(row.mean) << ",";
    if (!std::isnan(row.sd)) out << csv::format_double(row.sd);
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

void write_report_long_csv(const std::string& path, const BenchmarkReport& report,
                           const std::string& group_header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << group_header << ",estimator,kernel,metric,rep,value\n";
  for (const auto& row : report.rows)
    for (std::size_t r = 0; r < row.values.size(); ++r)
      out << row.group << "," << row.estimator << "," << row.kernel << ","
          << row.metric << "," << r << "," << csv::format_double(row.values[r])
          << "\n";
  if (!out) throw DataError("write failed: " + path);
}

} // namespace kfc::pipeline
