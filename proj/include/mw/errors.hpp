#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mw {

/// Base error for the library. `code()` is a stable machine-readable tag
/// used by reports and for the process exit-code contract.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Invalid run configuration or CLI input (maps to exit code 2).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config", what) {}
};

/// Domain/set/grid kind mismatch (e.g. a ProductBall on a line domain).
class DomainMismatchError : public Error {
public:
    explicit DomainMismatchError(const std::string& what)
        : Error("domain_mismatch", what) {}
};

/// A matrix whose spectrum falls below the relative eigenvalue floor.
class NearSingularError : public Error {
public:
    NearSingularError(const std::string& what, double min_eigenvalue)
        : Error("near_singular", what), min_eigenvalue_(min_eigenvalue) {}

    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

/// A weight sample that is not positive definite, with its location.
class DegenerateSampleError : public Error {
public:
    DegenerateSampleError(const std::string& what, std::vector<double> location,
                          double min_eigenvalue)
        : Error("degenerate_sample", what),
          location_(std::move(location)),
          min_eigenvalue_(min_eigenvalue) {}

    const std::vector<double>& location() const noexcept { return location_; }
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    std::vector<double> location_;
    double min_eigenvalue_;
};

/// Evaluation requested at a declared singular point.
class SingularPointError : public Error {
public:
    explicit SingularPointError(const std::string& what)
        : Error("singular_point", what) {}
};

/// The coarse integrability screen rejected the weight.
class NotIntegrableError : public Error {
public:
    explicit NotIntegrableError(const std::string& what)
        : Error("not_integrable", what) {}
};

/// Mismatched grid/vector shapes.
class ShapeMismatchError : public Error {
public:
    explicit ShapeMismatchError(const std::string& what)
        : Error("shape_mismatch", what) {}
};

/// Truncation or bump support escaping the computational window.
class SupportOverflowError : public Error {
public:
    explicit SupportOverflowError(const std::string& what)
        : Error("support_overflow", what) {}
};

}  // namespace mw
