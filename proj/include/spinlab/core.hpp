// core.hpp - scalar aliases, half-integer quantum numbers, and the error hierarchy
// shared by every spinlab module.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace spinlab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

using Vertex = int;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kZeroThreshold = 1e-15;

// ------------------------------------------------------------------ errors

/// Invalid argument or precondition violation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A symmetry sector with no states (unachievable quantum number).
class EmptySectorError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Numerical routine failed; carries the best residual reached.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double best_residual)
        : std::runtime_error(what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// Problem exceeds a configured size limit.
class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& what, std::uint64_t dim)
        : std::runtime_error(what), dim_(dim) {}
    std::uint64_t dimension() const noexcept { return dim_; }

private:
    std::uint64_t dim_;
};

/// Fewer distinct levels than a gap computation needs.
class DegenerateSpectrumError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operator couples a symmetry sector to its complement.
class SectorLeakError : public std::runtime_error {
public:
    SectorLeakError(const std::string& what, std::uint64_t row, std::uint64_t col, double magnitude)
        : std::runtime_error(what), row_(row), col_(col), magnitude_(magnitude) {}
    std::uint64_t row() const noexcept { return row_; }
    std::uint64_t col() const noexcept { return col_; }
    double magnitude() const noexcept { return magnitude_; }

private:
    std::uint64_t row_, col_;
    double magnitude_;
};

/// Casimir-based multiplet labelling could not be made unambiguous.
class ClassificationError : public std::runtime_error {
public:
    ClassificationError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// An ordering table is missing a total-spin entry.
class IncompleteTableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------ HalfInteger

/// Exact half-integer (spin magnitudes, magnetizations, total spins), stored as twice its value.
class HalfInteger {
public:
    constexpr HalfInteger() = default;

    static constexpr HalfInteger from_twice(int twice) noexcept {
        HalfInteger h;
        h.twice_ = twice;
        return h;
    }

    /// Accepts only exact multiples of 1/2.
    static HalfInteger from_double(double value) {
        const double twice = 2.0 * value;
        const double rounded = std::round(twice);
        if (!std::isfinite(value) || std::abs(twice - rounded) > 1e-12 ||
            std::abs(rounded) > static_cast<double>(std::numeric_limits<int>::max())) {
            throw DomainError("value " + std::to_string(value) + " is not a half-integer");
        }
        return from_twice(static_cast<int>(rounded));
    }

    constexpr int twice() const noexcept { return twice_; }
    constexpr double value() const noexcept { return 0.5 * twice_; }
    constexpr bool is_integer() const noexcept { return twice_ % 2 == 0; }

    constexpr HalfInteger operator+(HalfInteger o) const noexcept { return from_twice(twice_ + o.twice_); }
    constexpr HalfInteger operator-(HalfInteger o) const noexcept { return from_twice(twice_ - o.twice_); }
    constexpr HalfInteger operator-() const noexcept { return from_twice(-twice_); }
    constexpr auto operator<=>(const HalfInteger&) const noexcept = default;

    std::string str() const {
        if (is_integer()) return std::to_string(twice_ / 2);
        return std::to_string(twice_) + "/2";
    }

private:
    int twice_ = 0;
};

inline constexpr HalfInteger half(int twice) noexcept { return HalfInteger::from_twice(twice); }

inline HalfInteger abs(HalfInteger h) noexcept { return HalfInteger::from_twice(h.twice() < 0 ? -h.twice() : h.twice()); }

}  // namespace spinlab
