#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace kfc {

using Matrix = Eigen::MatrixXd; // rows are observations
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Task { Regression, Classification };

std::string task_name(Task t);
Task task_from_name(const std::string& name);

// Observations plus an optional target column. The universal input object:
// generated data, CSV imports and cluster views all pass through here.
struct Dataset {
  Matrix X;
  Vector y;
  bool has_target = false;
  Task task = Task::Regression;

  Index rows() const { return X.rows(); }
  Index dim() const { return X.cols(); }
};

} // namespace kfc
