#pragma once

#include <stdexcept>
#include <string>

namespace surftopo {

// Argument outside the documented domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Tool orientation for which the effective radius is undefined.
class SingularOrientationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A request would exceed a configured resource cap (triangle count, grid size).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file or record. The message carries path/line context.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Simulation finished but produced no usable result (e.g. tool never touched the grid).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace surftopo
