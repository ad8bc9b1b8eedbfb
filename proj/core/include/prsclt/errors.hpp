#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace prsclt {

class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a covariance matrix fails symmetry, PSD or reconstruction checks.
// check() names the failing test.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string check, const std::string& what)
        : std::runtime_error(what), check_(std::move(check)) {}
    const std::string& check() const noexcept { return check_; }

private:
    std::string check_;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ReplicationError : public std::runtime_error {
public:
    ReplicationError(const std::string& what, std::size_t index, std::uint64_t seed)
        : std::runtime_error(what), index_(index), seed_(seed) {}
    std::size_t index() const noexcept { return index_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::size_t index_;
    std::uint64_t seed_;
};

}  // namespace prsclt
