#pragma once

#include "kfc/datagen.hpp"
#include "kfc/types.hpp"

#include <string>
#include <vector>

namespace kfc::csv {

// Shortest decimal form that round-trips through IEEE-754 binary64.
std::string format_double(double v);

// Dataset files use the dialect: comma separator, '.' decimal point,
// mandatory header `x1,...,xd[,y][,cluster]`, UTF-8.
void write_dataset(const std::string& path, const datagen::LabeledDataset& ds);

struct LoadedCsv {
  Matrix X;
  Vector y;
  bool has_target = false;
  std::vector<int> cluster; // empty unless a cluster column is present
};

// Reads feature columns x1..xd plus optional y and cluster columns.
LoadedCsv read_dataset(const std::string& path);

// Single prediction column `yhat`.
void write_predictions(const std::string& path, const Vector& yhat);
Vector read_predictions(const std::string& path);

} // namespace kfc::csv
