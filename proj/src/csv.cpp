#include "kfc/csv.hpp"

#include "kfc/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kfc::csv {

std::string format_double(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t row) {
  double v = 0.0;
  auto first = s.data();
  auto last = s.data() + s.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{})
    throw DataError(path + ": row " + std::to_string(row) +
                    ": cannot parse number \"" + s + "\"");
  return v;
}

} // namespace

void write_dataset(const std::string& path, const datagen::LabeledDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (Index c = 0; c < ds.dim(); ++c) out << "x" << (c + 1) << ",";
  out << "y,cluster\n";
  for (Index i = 0; i < ds.rows(); ++i) {
    for (Index c = 0; c < ds.dim(); ++c) out << format_double(ds.X(i, c)) << ",";
    out << format_double(ds.y[i]) << ",";
    out << (ds.true_cluster.empty() ? 0 : ds.true_cluster[static_cast<std::size_t>(i)]);
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

LoadedCsv read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split_line(line);

  int y_col = -1, cluster_col = -1;
  std::vector<int> x_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == "y")
      y_col = static_cast<int>(c);
    else if (h == "cluster")
      cluster_col = static_cast<int>(c);
    else if (!h.empty() && h[0] == 'x')
      x_cols.push_back(static_cast<int>(c));
    else
      throw DataError(path + ": unexpected column \"" + h + "\"");
  }
  if (x_cols.empty()) throw DataError(path + ": no feature columns x1..xd");

  std::vector<std::vector<double>> rows;
  std::vector<double> ys;
  std::vector<int> clusters;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != header.size())
      throw DataError(path + ": row " + std::to_string(lineno) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    std::vector<double> x;
    x.reserve(x_cols.size());
    for (int c : x_cols)
      x.push_back(parse_double(fields[static_cast<std::size_t>(c)], path, lineno));
    rows.push_back(std::move(x));
    if (y_col >= 0)
      ys.push_back(parse_double(fields[static_cast<std::size_t>(y_col)], path, lineno));
    if (cluster_col >= 0)
      clusters.push_back(static_cast<int>(parse_double(
          fields[static_cast<std::size_t>(cluster_col)], path, lineno)));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");

  LoadedCsv out;
  out.X.resize(static_cast<Index>(rows.size()), static_cast<Index>(x_cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < x_cols.size(); ++c)
      out.X(static_cast<Index>(i), static_cast<Index>(c)) = rows[i][c];
  out.has_target = y_col >= 0;
  if (out.has_target) {
    out.y.resize(static_cast<Index>(ys.size()));
    for (std::size_t i = 0; i < ys.size(); ++i) out.y[static_cast<Index>(i)] = ys[i];
  }
  out.cluster = std::move(clusters);
  return out;
}

void write_predictions(const std::string& path, const Vector& yhat) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "yhat\n";
  for (Index i = 0; i < yhat.size(); ++i) out << format_double(yhat[i]) << "\n";
  if (!out) throw DataError("write failed: " + path);
}

Vector read_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool has_header = line == "yhat" || line == "y";
  std::vector<double> vals;
  std::size_t lineno = 1;
  if (!has_header) vals.push_back(parse_double(line, path, lineno));
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    vals.push_back(parse_double(line, path, lineno));
  }
  if (vals.empty()) throw DataError(path + ": no predictions");
  Vector v(static_cast<Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Index>(i)] = vals[i];
  return v;
}

} // namespace kfc::csv
