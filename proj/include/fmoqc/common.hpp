#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fmoqc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

// Raised when a value breaks a declared invariant or a precondition.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when an algorithm loses numerical integrity (trace drift,
// negative eigenvalue dips, divergent optimization, ...).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shared numeric thresholds.  Each governs one class of check; they are not
// interchangeable.
inline constexpr double kHermitianTol = 1e-12;   // max |M - M†| entry
inline constexpr double kTraceTol = 1e-10;       // |Tr - 1|
inline constexpr double kPsdTol = 1e-10;         // min eigenvalue >= -kPsdTol
inline constexpr double kCoherenceTol = 1e-9;    // forbidden ground/sink coherences
inline constexpr double kEntropyClampTol = 1e-10; // eigenvalues in [-tol, 0) -> 0
inline constexpr double kSupportTol = 1e-10;     // support membership for divergence
inline constexpr double kNullSpaceTol = 1e-14;   // eigenvalue treated as exactly null

// Distinguished return value for a relative entropy with support mismatch.
inline constexpr double kInfiniteDivergence = std::numeric_limits<double>::infinity();

inline bool is_infinite_divergence(double v) {
    return std::isinf(v) && v > 0;
}

}  // namespace fmoqc
