#pragma once

#include <stdexcept>
#include <string>

namespace nightatlas::core {

// Shape/size mismatches (crop larger than image, vector length mismatch, ...).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid settings: bad ranges, missing classes, k out of range, ...
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Too few samples for a statistic or decomposition.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Corrupt or mismatching serialized data (magic, version, truncation, CSV rows).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nightatlas::core
