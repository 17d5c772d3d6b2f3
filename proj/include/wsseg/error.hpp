#ifndef WSSEG_ERROR_HPP
#define WSSEG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace wsseg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable/unwritable files and malformed file contents.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Dimension or element-count mismatches.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range indices or values, including non-finite data.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or precondition violations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace wsseg

#endif  // WSSEG_ERROR_HPP
