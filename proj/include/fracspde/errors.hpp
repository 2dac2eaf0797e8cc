#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fracspde {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double estimate, double error)
        : std::runtime_error(what), estimate_(estimate), error_(error) {}
    double estimate() const noexcept { return estimate_; }
    double error() const noexcept { return error_; }

private:
    double estimate_;
    double error_;
};

/// Grid too coarse or box too small for the kernel; names the failing check.
class ResolutionError : public std::runtime_error {
public:
    ResolutionError(std::string heuristic, std::string parameter, const std::string& what)
        : std::runtime_error(what), heuristic_(std::move(heuristic)), parameter_(std::move(parameter)) {}
    const std::string& heuristic() const noexcept { return heuristic_; }
    const std::string& parameter() const noexcept { return parameter_; }

private:
    std::string heuristic_;
    std::string parameter_;
};

/// Objects built for different grids were combined.
class BindingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The sigma / Levy measure pair does not satisfy the existence condition.
class ConditionViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An integral that must be finite diverges for the given parameters.
class DivergenceError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Picard iteration exhausted its budget.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> ratios)
        : std::runtime_error(what), ratios_(std::move(ratios)) {}
    const std::vector<double>& ratios() const noexcept { return ratios_; }

private:
    std::vector<double> ratios_;
};

/// Malformed configuration text; line() is 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A configuration value violates its precondition; key() is the dotted path.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace fracspde
