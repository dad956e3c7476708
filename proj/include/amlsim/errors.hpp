#pragma once

#include <stdexcept>
#include <string>

namespace amlsim {

// Invalid basis/model/state/experiment configuration supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical contract was violated at run time (non-Hermitian Hamiltonian,
// norm drift past tolerance, eigensolver failure, ...).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// A statistic was requested on a state where it has no value, e.g. Mandel Q
// of a mode whose population is numerically zero.
class UndefinedStatisticError : public std::runtime_error {
 public:
  explicit UndefinedStatisticError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace amlsim
