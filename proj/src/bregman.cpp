#include "kfc/bregman.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace kfc::bregman {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// x * ln(x / y) with the 0 ln 0 = 0 convention on x.
double xlogxy(double x, double y) {
  return x == 0.0 ? 0.0 : x * std::log(x / y);
}

void check_pair(Kind k, const Vector& x, const Vector& y) {
  if (x.size() != y.size())
    throw DimensionMismatch("divergence: x has dim " + std::to_string(x.size()) +
                            ", y has dim " + std::to_string(y.size()));
  if (!in_domain(k, x, false))
    throw DomainError("divergence: first argument outside domain of " +
                      kind_name(k));
  if (!in_domain(k, y, true))
    throw DomainError("divergence: second argument not interior to domain of " +
                      kind_name(k));
}

} // namespace

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::Euclid: return "euclid";
    case Kind::GKL: return "gkl";
    case Kind::Logit: return "logit";
    case Kind::ItakuraSaito: return "itakura";
  }
  return "euclid";
}

Kind kind_from_name(const std::string& name) {
  std::string n = lower(name);
  if (n == "euclid") return Kind::Euclid;
  if (n == "gkl") return Kind::GKL;
  if (n == "logit") return Kind::Logit;
  if (n == "itakura") return Kind::ItakuraSaito;
  throw InvalidSpec("unknown divergence \"" + name +
                    "\" (expected euclid|gkl|logit|itakura)");
}

bool in_domain(Kind k, const Vector& x, bool interior_required) {
  for (Index i = 0; i < x.size(); ++i) {
    double v = x[i];
    if (!std::isfinite(v)) return false;
    switch (k) {
      case Kind::Euclid:
        break;
      case Kind::GKL:
        if (interior_required ? v <= 0.0 : v < 0.0) return false;
        break;
      case Kind::Logit:
        if (interior_required ? (v <= 0.0 || v >= 1.0) : (v < 0.0 || v > 1.0))
          return false;
        break;
      case Kind::ItakuraSaito:
        if (v <= 0.0) return false; // no boundary extension for -ln x
        break;
    }
  }
  return true;
}

double phi(Kind k, const Vector& x) {
  if (!in_domain(k, x, false))
    throw DomainError("phi: argument outside domain of " + kind_name(k));
  double s = 0.0;
  switch (k) {
    case Kind::Euclid:
      s = x.squaredNorm();
      break;
    case Kind::GKL:
      for (Index i = 0; i < x.size(); ++i) s += xlogxy(x[i], 1.0);
      break;
    case Kind::Logit:
      for (Index i = 0; i < x.size(); ++i)
        s += xlogxy(x[i], 1.0) + xlogxy(1.0 - x[i], 1.0);
      break;
    case Kind::ItakuraSaito:
      for (Index i = 0; i < x.size(); ++i) s -= std::log(x[i]);
      break;
  }
  return s;
}

Vector grad_phi(Kind k, const Vector& y) {
  if (!in_domain(k, y, true))
    throw DomainError("grad_phi: argument not interior to domain of " +
                      kind_name(k));
  Vector g(y.size());
  switch (k) {
    case Kind::Euclid:
      g = 2.0 * y;
      break;
    case Kind::GKL:
      for (Index i = 0; i < y.size(); ++i) g[i] = std::log(y[i]) + 1.0;
      break;
    case Kind::Logit:
      for (Index i = 0; i < y.size(); ++i)
        g[i] = std::log(y[i] / (1.0 - y[i]));
      break;
    case Kind::ItakuraSaito:
      for (Index i = 0; i < y.size(); ++i) g[i] = -1.0 / y[i];
      break;
  }
  return g;
}

double divergence(Kind k, const Vector& x, const Vector& y) {
  check_pair(k, x, y);
  double s = 0.0;
  switch (k) {
    case Kind::Euclid:
      s = (x - y).squaredNorm();
      break;
    case Kind::GKL:
      for (Index i = 0; i < x.size(); ++i)
        s += xlogxy(x[i], y[i]) - (x[i] - y[i]);
      break;
    case Kind::Logit:
      for (Index i = 0; i < x.size(); ++i)
        s += xlogxy(x[i], y[i]) + xlogxy(1.0 - x[i], 1.0 - y[i]);
      break;
    case Kind::ItakuraSaito:
      for (Index i = 0; i < x.size(); ++i) {
        double r = x[i] / y[i];
        s += r - std::log(r) - 1.0;
      }
      break;
  }
  return s;
}

Matrix divergence_matrix(Kind k, const Matrix& X, const Matrix& C) {
  if (X.cols() != C.cols())
    throw DimensionMismatch("divergence_matrix: column counts disagree");
  const Index n = X.rows();
  const Index m = C.rows();
  for (Index j = 0; j < m; ++j)
    if (!in_domain(k, C.row(j).transpose(), true))
      throw DomainError("divergence_matrix: center row " + std::to_string(j) +
                        " not interior to domain of " + kind_name(k));
  Matrix D(n, m);
  switch (k) {
    case Kind::Euclid: {
      // ||x||^2 - 2 x.c + ||c||^2
      Vector xn = X.rowwise().squaredNorm();
      Vector cn = C.rowwise().squaredNorm();
      D.noalias() = -2.0 * X * C.transpose();
      D.colwise() += xn;
      D.rowwise() += cn.transpose();
      break;
    }
    case Kind::GKL: {
      // sum x ln x - x.ln(c) - sum x + sum c
      Vector phix(n);
      for (Index i = 0; i < n; ++i) {
        if (!in_domain(k, X.row(i).transpose(), false))
          throw DomainError("divergence_matrix: row outside domain of gkl");
        double s = 0.0;
        for (Index t = 0; t < X.cols(); ++t) s += xlogxy(X(i, t), 1.0);
        phix[i] = s - X.row(i).sum();
      }
      Matrix logC = C.array().log().matrix();
      Vector csum = C.rowwise().sum();
      D.noalias() = -X * logC.transpose();
      D.colwise() += phix;
      D.rowwise() += csum.transpose();
      break;
    }
    case Kind::Logit: {
      // phi(x) - x.ln(c) - (1-x).ln(1-c)
      Vector phix(n);
      for (Index i = 0; i < n; ++i) phix[i] = phi(k, X.row(i).transpose());
      Matrix logC = C.array().log().matrix();
      Matrix log1C = (1.0 - C.array()).log().matrix();
      D.noalias() = -X * (logC - log1C).transpose();
      D.colwise() += phix;
      D.rowwise() -= log1C.rowwise().sum().transpose();
      break;
    }
    case Kind::ItakuraSaito: {
      // x.(1/c) - sum ln x + sum ln c - d
      Vector logx(n);
      for (Index i = 0; i < n; ++i) {
        if (!in_domain(k, X.row(i).transpose(), false))
          throw DomainError("divergence_matrix: row outside domain of itakura");
        logx[i] = X.row(i).array().log().sum();
      }
      Matrix invC = C.array().inverse().matrix();
      Vector logc = (C.array().log().matrix()).rowwise().sum();
      D.noalias() = X * invC.transpose();
      D.colwise() -= logx;
      D.rowwise() += logc.transpose();
      D.array() -= static_cast<double>(X.cols());
      break;
    }
  }
  return D.cwiseMax(0.0);
}

std::string repair_name(RepairStrategy s) {
  switch (s) {
    case RepairStrategy::None: return "none";
    case RepairStrategy::L1Normalize: return "l1normalize";
    case RepairStrategy::ShiftPositive: return "shiftpositive";
    case RepairStrategy::DropViolations: return "dropviolations";
  }
  return "none";
}

RepairStrategy repair_from_name(const std::string& name) {
  std::string n = lower(name);
  if (n == "none") return RepairStrategy::None;
  if (n == "l1normalize") return RepairStrategy::L1Normalize;
  if (n == "shiftpositive") return RepairStrategy::ShiftPositive;
  if (n == "dropviolations") return RepairStrategy::DropViolations;
  throw InvalidSpec("unknown repair strategy \"" + name + "\"");
}

RepairStrategy default_repair(Kind k) {
  switch (k) {
    case Kind::Euclid: return RepairStrategy::None;
    case Kind::GKL: return RepairStrategy::ShiftPositive;
    case Kind::ItakuraSaito: return RepairStrategy::ShiftPositive;
    case Kind::Logit: return RepairStrategy::L1Normalize;
  }
  return RepairStrategy::None;
}

namespace {

// Clamp one coordinate into the interior of C with margin eps.
double clamp_interior(Kind k, double v, double eps) {
  switch (k) {
    case Kind::Euclid:
      return v;
    case Kind::GKL:
    case Kind::ItakuraSaito:
      return v < eps ? eps : v;
    case Kind::Logit:
      return std::clamp(v, eps, 1.0 - eps);
  }
  return v;
}

} // namespace

Vector RepairTransform::apply_row(const Vector& x) const {
  Vector r = x;
  switch (strategy) {
    case RepairStrategy::None:
    case RepairStrategy::DropViolations:
      break; // queries fall through to the interior clamp below
    case RepairStrategy::L1Normalize: {
      double norm = r.lpNorm<1>();
      if (norm == 0.0) {
        if (zero_row_error)
          throw DegenerateRow("L1Normalize: zero-norm row");
        r.setZero(); // 0/0 = 0; the clamp pins it to the interior floor
      } else {
        r /= norm;
      }
      break;
    }
    case RepairStrategy::ShiftPositive:
      r.array() += shift;
      break;
  }
  for (Index i = 0; i < r.size(); ++i)
    r[i] = clamp_interior(div, r[i], interior_eps);
  return r;
}

Matrix RepairTransform::apply(const Matrix& X) const {
  Matrix out(X.rows(), X.cols());
  for (Index i = 0; i < X.rows(); ++i)
    out.row(i) = apply_row(X.row(i).transpose()).transpose();
  return out;
}

RepairResult fit_repair(const Matrix& X, Kind div, RepairStrategy strategy,
                        double eps0, bool zero_row_error) {
  if (X.rows() == 0) throw EmptyResult("fit_repair: empty dataset");
  RepairResult res;
  res.transform.div = div;
  res.transform.strategy = strategy;
  res.transform.interior_eps = eps0;
  res.transform.zero_row_error = zero_row_error;

  if (strategy == RepairStrategy::DropViolations) {
    std::vector<Index> kept;
    for (Index i = 0; i < X.rows(); ++i)
      if (in_domain(div, X.row(i).transpose(), true)) kept.push_back(i);
    if (kept.empty())
      throw EmptyResult("DropViolations removed every row");
    res.data.resize(static_cast<Index>(kept.size()), X.cols());
    for (std::size_t r = 0; r < kept.size(); ++r)
      res.data.row(static_cast<Index>(r)) = X.row(kept[r]);
    res.dropped = X.rows() - static_cast<Index>(kept.size());
    return res;
  }

  if (strategy == RepairStrategy::ShiftPositive) {
    double lo = X.minCoeff();
    if (lo <= 0.0) res.transform.shift = eps0 - lo;
  }

  res.data = res.transform.apply(X);
  return res;
}

Dataset repair_to_domain(const Dataset& data, Kind div, RepairStrategy strategy) {
  RepairResult rr = fit_repair(data.X, div, strategy);
  Dataset out = data;
  out.X = std::move(rr.data);
  if (strategy == RepairStrategy::DropViolations && data.has_target &&
      rr.dropped > 0) {
    // keep targets aligned with surviving rows
    Vector y(out.X.rows());
    Index w = 0;
    for (Index i = 0; i < data.X.rows(); ++i)
      if (in_domain(div, data.X.row(i).transpose(), true)) y[w++] = data.y[i];
    out.y = std::move(y);
  }
  return out;
}

} // namespace kfc::bregman
