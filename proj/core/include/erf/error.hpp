#pragma once

#include <stdexcept>
#include <string>

namespace erforest {

// Base class for every failure raised by the library. Precondition
// violations on plain arguments (length mismatches, out-of-range knobs)
// use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unusable input data: bad CSV, missing cells, single-class labels.
class DataError : public Error {
 public:
  using Error::Error;
};

// Training could not produce a model (e.g. every sample weight collapsed to zero).
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Model archive is unreadable, truncated or from an unsupported format version.
class ArchiveError : public Error {
 public:
  using Error::Error;
};

}  // namespace erforest
