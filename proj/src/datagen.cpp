#include "kfc/datagen.hpp"

#include "kfc/errors.hpp"
#include "kfc/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace kfc::datagen {

namespace {

constexpr double kNoiseVariance = 10.0;

// Table-driven per-cluster parameters; a and b are distribution-specific
// (rate for Exp, mean for Pois, success probability for Geom, mean/sd pairs
// for the Gaussians).
struct ClusterParams {
  double a[3];
  double b[3];
};

struct FamilyDef {
  int dim;
  ClusterParams cluster[3];
};

const FamilyDef& family_def(Family f) {
  static const FamilyDef exp_def{2,
                                 {{{0.05, 0.5, 0}, {0, 0, 0}},
                                  {{0.5, 0.05, 0}, {0, 0, 0}},
                                  {{0.1, 0.1, 0}, {0, 0, 0}}}};
  static const FamilyDef pois_def{2,
                                  {{{3, 11, 0}, {0, 0, 0}},
                                   {{10, 2, 0}, {0, 0, 0}},
                                   {{13, 12, 0}, {0, 0, 0}}}};
  static const FamilyDef geom_def{2,
                                  {{{0.07, 0.35, 0}, {0, 0, 0}},
                                   {{0.55, 0.07, 0}, {0, 0, 0}},
                                   {{0.15, 0.15, 0}, {0, 0, 0}}}};
  static const FamilyDef g2_def{2,
                                {{{4, 12, 0}, {1, 1, 0}},
                                 {{22, 9, 0}, {2, 1, 0}},
                                 {{10, 5, 0}, {2, 2, 0}}}};
  static const FamilyDef g3_def{3,
                                {{{6, 14, 6}, {1, 2, 1}},
                                 {{5, 10, 15}, {2, 1, 2}},
                                 {{8, 6, 14}, {1, 1, 2}}}};
  switch (f) {
    case Family::Exp: return exp_def;
    case Family::Pois: return pois_def;
    case Family::Geom: return geom_def;
    case Family::Gauss2D: return g2_def;
    case Family::Gauss3D: return g3_def;
  }
  return g2_def;
}

// Table 3 slopes and the fixed regression intercepts.
void model_coefficients(Family f, Matrix& betas, Vector& intercepts) {
  const int d = family_def(f).dim;
  betas.resize(3, d);
  if (d == 2) {
    betas << -8, 3, -6, -5, 5, -7;
  } else {
    betas << -10, 3, 7, 7, 5, -12, 6, -11, 10;
  }
  intercepts.resize(3);
  intercepts << -15, 25, -10;
}

double draw_coord(Family f, const ClusterParams& p, int coord, Rng& rng) {
  switch (f) {
    case Family::Exp: return rng.exponential(p.a[coord]);
    case Family::Pois: return rng.poisson(p.a[coord]);
    case Family::Geom: return rng.geometric(p.a[coord]);
    case Family::Gauss2D:
    case Family::Gauss3D: return rng.normal(p.a[coord], p.b[coord]);
  }
  return 0.0;
}

Matrix draw_cluster_inputs(Family f, int cluster, int n, std::uint64_t seed) {
  const FamilyDef& def = family_def(f);
  const ClusterParams& p = def.cluster[cluster % 3];
  Rng rng(seed);
  Matrix X(n, def.dim);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < def.dim; ++c) X(i, c) = draw_coord(f, p, c, rng);
  return X;
}

std::uint64_t family_tag(Family f) { return static_cast<std::uint64_t>(f) + 17; }

} // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::Exp: return "exp";
    case Family::Pois: return "pois";
    case Family::Geom: return "geom";
    case Family::Gauss2D: return "gauss2d";
    case Family::Gauss3D: return "gauss3d";
  }
  return "gauss2d";
}

Family family_from_name(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (n == "exp") return Family::Exp;
  if (n == "pois") return Family::Pois;
  if (n == "geom") return Family::Geom;
  if (n == "gauss2d") return Family::Gauss2D;
  if (n == "gauss3d") return Family::Gauss3D;
  throw InvalidSpec("unknown family \"" + name +
                    "\" (expected exp|pois|geom|gauss2d|gauss3d)");
}

int family_dim(Family f) { return family_def(f).dim; }

Vector balanced_intercepts(const Matrix& X, const std::vector<int>& partition,
                           const Matrix& betas) {
  if (static_cast<Index>(partition.size()) != X.rows())
    throw LengthMismatch("balanced_intercepts: partition does not cover X");
  const int k = static_cast<int>(betas.rows());
  Matrix sums = Matrix::Zero(k, X.cols());
  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (Index i = 0; i < X.rows(); ++i) {
    int c = partition[static_cast<std::size_t>(i)];
    if (c < 0 || c >= k)
      throw LengthMismatch("balanced_intercepts: cluster index out of range");
    sums.row(c) += X.row(i);
    ++counts[static_cast<std::size_t>(c)];
  }
  Vector b0(k);
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw EmptyCluster("balanced_intercepts: cluster " + std::to_string(c) +
                         " has no members");
    Vector mean =
        sums.row(c).transpose() / static_cast<double>(counts[static_cast<std::size_t>(c)]);
    b0[c] = -betas.row(c).dot(mean);
  }
  return b0;
}

std::vector<int> classification_targets(const Vector& scores, double noise_sd,
                                        std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> labels(static_cast<std::size_t>(scores.size()));
  for (Index i = 0; i < scores.size(); ++i)
    labels[static_cast<std::size_t>(i)] =
        scores[i] + rng.normal(0.0, noise_sd) > 0.0 ? 1 : 0;
  return labels;
}

std::pair<LabeledDataset, LabeledDataset> generate(const DatasetSpec& spec) {
  if (spec.k < 1) throw InvalidSpec("generate: K must be >= 1");
  if (spec.n_train < 1 || spec.n_test < 1)
    throw InvalidSpec("generate: cluster sizes must be >= 1");
  const FamilyDef& def = family_def(spec.family);
  const double noise_sd = std::sqrt(kNoiseVariance);

  Matrix betas3;
  Vector intercepts3;
  model_coefficients(spec.family, betas3, intercepts3);
  // K != 3 cycles through the three parameter columns
  Matrix betas(spec.k, def.dim);
  Vector reg_intercepts(spec.k);
  for (int c = 0; c < spec.k; ++c) {
    betas.row(c) = betas3.row(c % 3);
    reg_intercepts[c] = intercepts3[c % 3];
  }

  auto draw_split = [&](int n_per_cluster, std::uint64_t split_tag) {
    LabeledDataset ds;
    ds.task = spec.task;
    ds.X.resize(static_cast<Index>(n_per_cluster) * spec.k, def.dim);
    ds.true_cluster.resize(static_cast<std::size_t>(n_per_cluster) * spec.k);
    for (int c = 0; c < spec.k; ++c) {
      Matrix block = draw_cluster_inputs(
          spec.family, c, n_per_cluster,
          derive_seed({spec.seed, family_tag(spec.family), split_tag,
                       static_cast<std::uint64_t>(c)}));
      ds.X.middleRows(static_cast<Index>(c) * n_per_cluster, n_per_cluster) = block;
      for (int i = 0; i < n_per_cluster; ++i)
        ds.true_cluster[static_cast<std::size_t>(c) * n_per_cluster + i] = c;
    }
    return ds;
  };

  LabeledDataset train = draw_split(spec.n_train, 0xa11U);
  LabeledDataset test = draw_split(spec.n_test, 0xb22U);

  Vector intercepts = reg_intercepts;
  if (spec.task == Task::Classification)
    intercepts = balanced_intercepts(train.X, train.true_cluster, betas);

  auto fill_targets = [&](LabeledDataset& ds, std::uint64_t split_tag) {
    ds.y.resize(ds.X.rows());
    for (int c = 0; c < spec.k; ++c) {
      std::uint64_t noise_seed =
          derive_seed({spec.seed, family_tag(spec.family), split_tag,
                       static_cast<std::uint64_t>(c), 0x707fULL});
      // rows of cluster c are contiguous
      Index b0 = -1, b1 = -1;
      for (Index i = 0; i < ds.X.rows(); ++i)
        if (ds.true_cluster[static_cast<std::size_t>(i)] == c) {
          if (b0 < 0) b0 = i;
          b1 = i + 1;
        }
      Vector scores(b1 - b0);
      for (Index i = b0; i < b1; ++i)
        scores[i - b0] = intercepts[c] + betas.row(c).dot(ds.X.row(i));
      if (spec.task == Task::Regression) {
        Rng rng(noise_seed);
        for (Index i = b0; i < b1; ++i)
          ds.y[i] = scores[i - b0] + rng.normal(0.0, noise_sd);
      } else {
        std::vector<int> labels =
            classification_targets(scores, noise_sd, noise_seed);
        for (Index i = b0; i < b1; ++i)
          ds.y[i] = static_cast<double>(labels[static_cast<std::size_t>(i - b0)]);
      }
    }
  };

  fill_targets(train, 0xa11U);
  fill_targets(test, 0xb22U);
  return {std::move(train), std::move(test)};
}

} // namespace kfc::datagen
