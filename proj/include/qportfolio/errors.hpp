#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qportfolio {

// Malformed or inconsistent input data (bad CSV, unknown ticker, missing
// overlap window, invalid stored JSON).  The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine could not produce a usable result (integration that
// never converged where convergence is required, optimizer failure, ...).
// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Optimizer failure that keeps the per-generation trace for post-mortems.
class OptimizationError : public NumericalError {
 public:
  OptimizationError(const std::string& what, std::vector<double> trace)
      : NumericalError(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

// A performance metric is mathematically undefined for the given inputs
// (zero return variance for Sharpe, zero downside deviation for Sortino).
class UndefinedMetricError : public std::domain_error {
 public:
  explicit UndefinedMetricError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace qportfolio
