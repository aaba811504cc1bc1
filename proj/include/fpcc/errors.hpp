#pragma once

#include <stdexcept>
#include <string>

namespace fpcc {

// A model assumption failed at a concrete evaluation point (e.g. D <= 0 at a face).
class AssumptionError : public std::runtime_error {
public:
  explicit AssumptionError(const std::string& what) : std::runtime_error(what) {}
};

// A linear solve did not reach the requested tolerance.
class SolveError : public std::runtime_error {
public:
  SolveError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

// A bound formula was evaluated outside its hypotheses (e.g. gamma*dt >= 1).
class HypothesisError : public std::invalid_argument {
public:
  explicit HypothesisError(const std::string& what) : std::invalid_argument(what) {}
};

// Bad run configuration (CLI / config file level).
class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace fpcc
