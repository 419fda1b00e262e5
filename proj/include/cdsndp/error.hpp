#pragma once

#include <stdexcept>
#include <string>

namespace cdsndp {

/// Malformed or inconsistent input data (instance files, flags, grids).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// A model cannot be built from otherwise valid input (e.g. non-negative cost coefficient).
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// A solver backend failed to produce a usable answer.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cdsndp
