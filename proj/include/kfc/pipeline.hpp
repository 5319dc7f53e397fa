#pragma once

#include "kfc/aggregation.hpp"
#include "kfc/bregman.hpp"
#include "kfc/clustering.hpp"
#include "kfc/datagen.hpp"
#include "kfc/local_models.hpp"
#include "kfc/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kfc::pipeline {

// One divergence's branch of the procedure: its repair transform, fitted
// centroids and the K local predictors. Queries are repaired with the
// training parameters, routed to the nearest centroid and scored by that
// cluster's model.
struct ClusterModel {
  bregman::Kind div = bregman::Kind::Euclid;
  bregman::RepairTransform repair;
  clustering::Centroids centroids;
  std::vector<local_models::Model> locals;
};

double member_predict(const ClusterModel& m, const Vector& x);

// Prediction vectors m(x) for every row: linear responses for regression,
// thresholded labels for classification.
Matrix prediction_vectors(const std::vector<ClusterModel>& members,
                          const Matrix& X, Task task);

struct Ensemble {
  Task task = Task::Regression;
  std::vector<ClusterModel> members;
  aggregation::AggregationSample sample;
  aggregation::AggregationConfig config;
};

struct TrainConfig {
  int k = 3;
  std::vector<bregman::Kind> divergences{
      bregman::Kind::Euclid, bregman::Kind::GKL, bregman::Kind::Logit,
      bregman::Kind::ItakuraSaito};
  int restarts = 10;
  int max_iter = 100;
  aggregation::Method method = aggregation::Method::Comb2;
  aggregation::Kernel kernel = aggregation::Kernel::Gaussian;
  aggregation::GridSpec grid;
  int folds = 5;
  double comb1_alpha = 1.0;
  // fraction of the training set reserved for the aggregation sample only;
  // 0 shares the full training set between the local fits and the combiner
  double split_fraction = 0.0;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Members plus the aggregation sample, before any combiner is tuned; the
// benchmark loop reuses this across methods and kernels.
struct FittedMembers {
  Task task = Task::Regression;
  std::vector<ClusterModel> members;
  aggregation::AggregationSample sample;
  std::vector<std::vector<int>> member_partitions; // k-means assignment per member
  std::vector<Index> model_rows; // training rows the members were fit on
};

FittedMembers fit_members(const datagen::LabeledDataset& train,
                          const TrainConfig& cfg);

// The full three-step procedure: cluster per divergence, fit per cluster,
// tune the configured combiner by cross-validation.
Ensemble kfc_train(const datagen::LabeledDataset& train, const TrainConfig& cfg);

// Repair, assign and locally predict per member, then combine.
double kfc_predict(const Ensemble& ens, const Vector& x);
Vector kfc_predict_batch(const Ensemble& ens, const Matrix& X);

struct ReportRow {
  std::string group; // dataset name, or the K value in sweep tables
  std::string estimator;
  std::string kernel; // empty outside combiner rows
  std::string metric;
  double mean = 0.0;
  double sd = 0.0; // n-1 denominator; NaN when only one value
  std::vector<double> values;
};

struct BenchmarkReport {
  std::vector<ReportRow> rows;
  int reps = 0;
};

struct BenchConfig {
  TrainConfig train;
  std::vector<aggregation::Method> methods{aggregation::Method::Comb2,
                                           aggregation::Method::Comb3};
  std::vector<aggregation::Kernel> kernels{
      aggregation::Kernel::Uniform, aggregation::Kernel::Epanechnikov,
      aggregation::Kernel::Gaussian, aggregation::Kernel::Triangular,
      aggregation::Kernel::Biweight, aggregation::Kernel::Triweight};
  int reps = 20;
  bool with_single = true;
  bool with_nmi = true;
  int jobs = 1;
};

// Generate/train/evaluate `reps` times on derived seeds; rows carry NMI per
// divergence, the single-model baseline, member test errors and one tuned
// combiner per (method, kernel).
BenchmarkReport replicate(const datagen::DatasetSpec& spec, const BenchConfig& cfg);

// Repeated random 80/20 splits of one dataset for each K in k_range,
// mirroring the unknown-K protocol.
BenchmarkReport k_sweep(const datagen::LabeledDataset& data,
                        const std::vector<int>& k_range, const BenchConfig& cfg,
                        int n_splits = 20, double train_fraction = 0.8);

// Report files: columns group,estimator,kernel,metric,mean,sd (the group
// header is "dataset" for replicate tables and "k" for sweeps). The long
// per-replication file appends one value column per rep.
void write_report_csv(const std::string& path, const BenchmarkReport& report,
                      const std::string& group_header);
void write_report_long_csv(const std::string& path, const BenchmarkReport& report,
                           const std::string& group_header);

} // namespace kfc::pipeline
