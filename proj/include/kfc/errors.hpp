#pragma once

#include <stdexcept>
#include <string>

namespace kfc {

// Data/domain problems (CLI exit code 2).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric failures (CLI exit code 3).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : DataError {
  using DataError::DataError;
};

struct DimensionMismatch : DataError {
  using DataError::DataError;
};

struct LengthMismatch : DataError {
  using DataError::DataError;
};

struct EmptyResult : DataError {
  using DataError::DataError;
};

struct DegenerateRow : DataError {
  using DataError::DataError;
};

struct InvalidK : DataError {
  using DataError::DataError;
};

struct EmptyCluster : DataError {
  using DataError::DataError;
};

struct EmptyGrid : DataError {
  using DataError::DataError;
};

struct DegeneratePartition : DataError {
  using DataError::DataError;
};

struct InvalidSpec : DataError {
  using DataError::DataError;
};

} // namespace kfc
