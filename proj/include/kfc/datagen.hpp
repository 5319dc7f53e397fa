#pragma once

#include "kfc/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace kfc::datagen {

// The five simulated families. Coordinates are drawn independently with
// per-cluster parameters:
//   Exp      d=2, rates        (0.05,0.5) (0.5,0.05) (0.1,0.1)
//   Pois     d=2, means        (3,11)     (10,2)     (13,12)
//   Geom     d=2, success p    (0.07,0.35)(0.55,0.07)(0.15,0.15), support {1,2,...}
//   Gauss2D  d=2, mu/sigma     (4,12)/(1,1) (22,9)/(2,1) (10,5)/(2,2)
//   Gauss3D  d=3, mu/sigma     (6,14,6)/(1,2,1) (5,10,15)/(2,1,2) (8,6,14)/(1,1,2)
enum class Family { Exp, Pois, Geom, Gauss2D, Gauss3D };

constexpr Family kAllFamilies[] = {Family::Exp, Family::Pois, Family::Geom,
                                   Family::Gauss2D, Family::Gauss3D};

std::string family_name(Family f);
Family family_from_name(const std::string& name);
int family_dim(Family f);

struct DatasetSpec {
  Family family = Family::Gauss2D;
  Task task = Task::Regression;
  int n_train = 500; // per cluster
  int n_test = 150;  // per cluster
  int k = 3;
  std::uint64_t seed = 0;
};

struct LabeledDataset {
  Matrix X;
  Vector y;
  std::vector<int> true_cluster; // empty for externally loaded data
  Task task = Task::Regression;

  Index rows() const { return X.rows(); }
  Index dim() const { return X.cols(); }
};

// Regression targets use the fixed intercepts (-15, 25, -10) and centered
// Gaussian noise of variance 10; classification intercepts are balanced per
// cluster (computed on the training inputs and reused for the test split) so
// that the linear score is centered at zero and labels split roughly evenly.
// Train and test are drawn from disjoint seeded streams.
std::pair<LabeledDataset, LabeledDataset> generate(const DatasetSpec& spec);

// beta0_k = -<beta_k, alpha_k> with alpha_k the per-cluster coordinate means.
Vector balanced_intercepts(const Matrix& X, const std::vector<int>& partition,
                           const Matrix& betas);

// label_i = 1 iff score_i + eps_i > 0, eps ~ N(0, noise_sd^2).
std::vector<int> classification_targets(const Vector& scores, double noise_sd,
                                        std::uint64_t seed);

} // namespace kfc::datagen
