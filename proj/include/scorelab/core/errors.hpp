#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace scorelab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (negative time, t = 0 where
/// sigma^2 > 0 is required, dimension mismatch, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Posterior p(y | x) is undefined: sigma^2 = 0 and x is not a data point.
class SingularPosteriorError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Operation not defined for the given distribution variant.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Failure of a numerical routine (blow-up, eigensolve, non-finite output).
class NumericError : public Error {
public:
    using Error::Error;
};

class IntegrationBlowUp : public NumericError {
public:
    IntegrationBlowUp(std::size_t step, const std::string& what)
        : NumericError("integration blow-up at step " + std::to_string(step) + ": " + what),
          step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : NumericError(what + " (last residual " + std::to_string(last_residual) + ")"),
          last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// A candidate vector field produced a non-finite value.
class EvaluationError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Fewer usable data points than a fit requires.
class InsufficientDataError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Input file could not be parsed. `row()` is 1-based; 0 means "whole file".
class ParseError : public Error {
public:
    ParseError(std::size_t row, const std::string& what)
        : Error(row == 0 ? what : "row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// Scenario validation failure; carries every violated field.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> problems)
        : Error(join(problems)), problems_(std::move(problems)) {}
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out = "invalid scenario:";
        for (const auto& p : items) out += "\n  - " + p;
        return out;
    }
    std::vector<std::string> problems_;
};

}  // namespace scorelab
