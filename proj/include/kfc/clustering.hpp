#pragma once

#include "kfc/bregman.hpp"
#include "kfc/types.hpp"

#include <cstdint>
#include <vector>

namespace kfc::clustering {

struct Centroids {
  bregman::Kind div = bregman::Kind::Euclid;
  Matrix centers; // K x d, every row strictly interior to C
};

struct Partition {
  std::vector<int> assignment;
  int k = 0;
};

struct KMeansResult {
  Centroids centroids;
  Partition partition;
  double distortion = 0.0;
  int iterations = 0;
  int restart_index = 0;
  std::vector<double> distortion_trace;    // winning run, value per iteration
  std::vector<double> restart_distortions; // final distortion of every restart
};

// Index of the divergence-minimizing centroid; ties go to the smallest index.
int assign(const Centroids& c, const Vector& x);

// Empirical distortion (1/n) sum_i min_k d_phi(X_i, c_k).
double distortion(const Matrix& X, const Centroids& c);

// Lloyd iterations under d_phi: assign to the nearest centroid, recenter at
// the arithmetic mean (the divergence-minimizing center for every Bregman
// divergence). Initial centroids are drawn uniformly without replacement from
// the data; the best of `restarts` runs by empirical distortion wins, ties
// broken by restart index. Each restart seeds its own RNG stream from
// (seed, restart), so results do not depend on evaluation order.
KMeansResult kmeans_fit(const Matrix& X, int k, bregman::Kind div,
                        int restarts = 10, int max_iter = 100,
                        std::uint64_t seed = 0, int jobs = 1);

} // namespace kfc::clustering
