#pragma once

/**
 * @file error.hpp
 * @brief Exception hierarchy shared by all permod modules.
 *
 * Data problems (bad CSV, violated dataset invariants) derive from DataError,
 * simulation and fitting problems from ModelError. The CLI maps the two
 * families onto distinct exit codes.
 */

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace permod {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid input data: unknown dataset names, invariant violations.
class DataError : public Error {
public:
  using Error::Error;
};

/// CSV parse failure with a 1-based row (line) and column location.
class ParseError : public DataError {
public:
  ParseError(std::size_t row, std::size_t column, const std::string &what)
      : DataError("row " + std::to_string(row) + ", column " +
                  std::to_string(column) + ": " + what),
        row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t row_;
  std::size_t column_;
};

class ModelError : public Error {
public:
  using Error::Error;
};

/// A τ rule evaluated outside its domain (e.g. D_CP <= 0 for skib/bart).
class DomainError : public ModelError {
public:
  using ModelError::ModelError;
};

/// The requested intensity never exhausts the model within the time limit.
class SustainableIntensity : public ModelError {
public:
  SustainableIntensity(double power, double t_max)
      : ModelError("intensity " + std::to_string(power) +
                   " W is sustainable (no exhaustion within " +
                   std::to_string(t_max) + " s)"),
        power_(power) {}

  double power() const noexcept { return power_; }

private:
  double power_;
};

/// Optimizer failure. Carries the best iterate found before giving up.
class FitError : public ModelError {
public:
  FitError(const std::string &what, std::vector<double> best)
      : ModelError(what), best_(std::move(best)) {}

  const std::vector<double> &best_iterate() const noexcept { return best_; }

private:
  std::vector<double> best_;
};

} // namespace permod
