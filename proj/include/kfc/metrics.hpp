#pragma once

#include "kfc/types.hpp"

#include <vector>

namespace kfc::metrics {

// Normalized mutual information between two partitions of the same n points,
//   rho(S, S') = sum_{j,l} n_jl ln(n n_jl / (n_j n'_l))
//              / sqrt( (sum_j n_j ln(n_j/n)) (sum_l n'_l ln(n'_l/n)) ),
// with empty intersections contributing 0. Values lie in [0, 1]; identical
// partitions give 1. Throws DegeneratePartition when either side puts all
// points into a single cluster (a zero denominator factor), so callers must
// exclude K = 1 from NMI tables.
double nmi(const std::vector<int>& a, const std::vector<int>& b);

// Fraction of disagreements.
double misclassification(const std::vector<int>& yhat, const std::vector<int>& y);

double rmse(const Vector& yhat, const Vector& y);

} // namespace kfc::metrics
