#pragma once

#include <stdexcept>
#include <string>

namespace srvf {

// Error taxonomy mirrors the CLI exit codes: usage 1, data 2, numerical 3.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace srvf
