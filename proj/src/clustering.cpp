#include "kfc/clustering.hpp"

#include "kfc/errors.hpp"
#include "kfc/parallel.hpp"
#include "kfc/rng.hpp"

#include <cmath>
#include <limits>

namespace kfc::clustering {

namespace {

struct Run {
  Matrix centers;
  std::vector<int> assignment;
  double distortion = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

// One Lloyd run from a seeded random initialization.
Run lloyd_run(const Matrix& X, int k, bregman::Kind div, int max_iter,
              std::uint64_t seed) {
  const Index n = X.rows();
  const Index d = X.cols();
  Rng rng(seed);

  // draw k distinct data points as initial centroids
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  Run run;
  run.centers.resize(k, d);
  for (int c = 0; c < k; ++c) {
    std::size_t j = c + static_cast<std::size_t>(rng.below(n - c));
    std::swap(pool[c], pool[j]);
    run.centers.row(c) = X.row(pool[c]);
  }

  run.assignment.assign(static_cast<std::size_t>(n), -1);
  std::vector<double> nearest(static_cast<std::size_t>(n), 0.0);
  double prev_distortion = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < max_iter; ++iter) {
    // assign
    Matrix D = bregman::divergence_matrix(div, X, run.centers);
    bool changed = false;
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = D(i, 0);
      for (int c = 1; c < k; ++c)
        if (D(i, c) < best_d) {
          best_d = D(i, c);
          best = c;
        }
      if (run.assignment[static_cast<std::size_t>(i)] != best) {
        run.assignment[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
      nearest[static_cast<std::size_t>(i)] = best_d;
      total += best_d;
    }
    run.distortion = total / static_cast<double>(n);
    run.trace.push_back(run.distortion);
    run.iterations = iter + 1;

    if (!changed) break;
    // stagnation guard against assignment cycling under exact ties
    if (iter > 0 && prev_distortion - run.distortion <
                        1e-10 * std::max(1.0, std::abs(prev_distortion)))
      break;
    prev_distortion = run.distortion;
    // keep the reported distortion in sync with the returned centers: never
    // recenter after the final assign pass
    if (iter == max_iter - 1) break;

    // recenter at cluster means
    Matrix sums = Matrix::Zero(k, d);
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      int c = run.assignment[static_cast<std::size_t>(i)];
      sums.row(c) += X.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        run.centers.row(c) =
            sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else {
        // reseed an emptied cluster at the point contributing most to the
        // distortion (largest divergence to its own centroid)
        Index worst = 0;
        double worst_d = -1.0;
        for (Index i = 0; i < n; ++i) {
          if (taken[static_cast<std::size_t>(i)]) continue;
          if (nearest[static_cast<std::size_t>(i)] > worst_d) {
            worst_d = nearest[static_cast<std::size_t>(i)];
            worst = i;
          }
        }
        taken[static_cast<std::size_t>(worst)] = true;
        run.centers.row(c) = X.row(worst);
      }
    }
  }
  return run;
}

} // namespace

int assign(const Centroids& c, const Vector& x) {
  const int k = static_cast<int>(c.centers.rows());
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j) {
    double dist = bregman::divergence(c.div, x, c.centers.row(j).transpose());
    if (dist < best_d) {
      best_d = dist;
      best = j;
    }
  }
  return best;
}

double distortion(const Matrix& X, const Centroids& c) {
  Matrix D = bregman::divergence_matrix(c.div, X, c.centers);
  return D.rowwise().minCoeff().mean();
}

KMeansResult kmeans_fit(const Matrix& X, int k, bregman::Kind div, int restarts,
                        int max_iter, std::uint64_t seed, int jobs) {
  const Index n = X.rows();
  if (k <= 0 || static_cast<Index>(k) > n)
    throw InvalidK("kmeans_fit: need 1 <= K <= n, got K=" + std::to_string(k) +
                   ", n=" + std::to_string(n));
  if (restarts < 1) throw InvalidK("kmeans_fit: restarts must be >= 1");
  for (Index i = 0; i < n; ++i)
    if (!bregman::in_domain(div, X.row(i).transpose(), true))
      throw DomainError("kmeans_fit: row " + std::to_string(i) +
                        " not interior to domain of " + bregman::kind_name(div));

  std::vector<Run> runs(static_cast<std::size_t>(restarts));
  parallel_for(static_cast<std::size_t>(restarts), jobs, [&](std::size_t r) {
    runs[r] = lloyd_run(X, k, div, max_iter,
                        derive_seed({seed, 0x6b6d65616e73ULL, r}));
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].distortion < runs[best].distortion) best = r;

  KMeansResult res;
  res.centroids.div = div;
  res.centroids.centers = std::move(runs[best].centers);
  res.partition.assignment = std::move(runs[best].assignment);
  res.partition.k = k;
  res.distortion = runs[best].distortion;
  res.iterations = runs[best].iterations;
  res.restart_index = static_cast<int>(best);
  res.distortion_trace = std::move(runs[best].trace);
  res.restart_distortions.reserve(runs.size());
  for (const auto& r : runs) res.restart_distortions.push_back(r.distortion);
  return res;
}

} // namespace kfc::clustering
