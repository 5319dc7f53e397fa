#include "kfc/metrics.hpp"

#include "kfc/errors.hpp"

#include <cmath>
#include <map>

namespace kfc::metrics {

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw LengthMismatch("nmi: partitions cover different numbers of points");
  if (a.empty()) throw LengthMismatch("nmi: empty partitions");
  const double n = static_cast<double>(a.size());

  std::map<int, double> na, nb;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na[a[i]] += 1.0;
    nb[b[i]] += 1.0;
    joint[{a[i], b[i]}] += 1.0;
  }
  if (na.size() < 2 || nb.size() < 2)
    throw DegeneratePartition("nmi: single-cluster partition");

  double numer = 0.0;
  for (const auto& [jl, njl] : joint)
    numer += njl * std::log(n * njl / (na[jl.first] * nb[jl.second]));

  double da = 0.0, db = 0.0;
  for (const auto& [j, nj] : na) da += nj * std::log(nj / n);
  for (const auto& [l, nl] : nb) db += nl * std::log(nl / n);

  return numer / std::sqrt(da * db);
}

double misclassification(const std::vector<int>& yhat, const std::vector<int>& y) {
  if (yhat.size() != y.size())
    throw LengthMismatch("misclassification: length mismatch");
  if (y.empty()) throw LengthMismatch("misclassification: empty input");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (yhat[i] != y[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(y.size());
}

double rmse(const Vector& yhat, const Vector& y) {
  if (yhat.size() != y.size()) throw LengthMismatch("rmse: length mismatch");
  if (y.size() == 0) throw LengthMismatch("rmse: empty input");
  return std::sqrt((yhat - y).squaredNorm() / static_cast<double>(y.size()));
}

} // namespace kfc::metrics
