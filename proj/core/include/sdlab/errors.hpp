#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A precondition on the inputs of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// A coefficient is nonpositive away from the degeneracy point.
class InvalidCoefficientError : public Error {
public:
    using Error::Error;
};

class AssemblyError : public Error {
public:
    AssemblyError(const std::string& what, std::size_t cell);
    std::size_t cell() const noexcept { return cell_; }

private:
    std::size_t cell_;
};

/// Cholesky met a non-positive pivot.
class NotSpdError : public Error {
public:
    NotSpdError(std::size_t pivot_index, double pivot);
    std::size_t pivot_index() const noexcept { return index_; }
    double pivot() const noexcept { return pivot_; }

private:
    std::size_t index_;
    double pivot_;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual);
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A time step produced a non-finite state.
class InstabilityError : public Error {
public:
    InstabilityError(const std::string& what, std::size_t step);
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// The singular strength makes K_a - lambda M_b indefinite; the evolution is refused.
class InadmissibleLambdaError : public Error {
public:
    InadmissibleLambdaError(double lambda, double min_eig_shifted);
    double lambda() const noexcept { return lambda_; }
    double min_eig_shifted() const noexcept { return min_eig_; }

private:
    double lambda_;
    double min_eig_;
};

}  // namespace sdlab
