// common.hpp
//
// Shared aliases, error types, tolerances and small numeric helpers used
// across the library. Everything is complex double precision; identities are
// checked at sampled spectral points rather than symbolically.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace openbethe {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Configuration / precondition violations (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime numerical failures: singular matrices, pole proximity,
// non-convergence, guard violations (CLI exit code 1).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace tol {
// Default thresholds, pinned once and used by tests and the CLI alike.
constexpr double identity = 1e-9;        // relative residual of algebraic identities
constexpr double strict = 1e-12;         // exact-in-exact-arithmetic identities
constexpr double hw_annihilation = 1e-11;
constexpr double weight_match = 1e-9;    // closed-form vs operator-action weights
constexpr double bethe_residual = 1e-10;
constexpr double ed_match = 1e-7;
constexpr double residue = 1e-8;
constexpr double vector_match = 1e-9;    // trace vs recursion Bethe vectors
constexpr double collision = 1e-8;       // |u_kj +- u_ki|, |2 u_kj| guards
constexpr double pole_guard = 1e-10;     // normalized R-matrix pole
constexpr double sample_denominator = 1e-6;  // resample if a denominator gets this small
constexpr double inversion_condition = 1e12;
}  // namespace tol

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double max_abs(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Relative deviation of two matrices in the max-entry norm.
inline double rel_diff(const Matrix& a, const Matrix& b) {
  double scale = std::max(max_abs(a), max_abs(b));
  if (scale == 0.0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double rel_diff(const Vector& a, const Vector& b) {
  double scale = std::max(max_abs(a), max_abs(b));
  if (scale == 0.0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite entries");
}

// Deterministic complex sample points for polynomial-identity testing.
// Points stay away from the real axis, where the rational prefactors and
// the quantum determinant have their zeros for real parameters.
inline std::vector<cplx> sample_points(std::size_t count, std::uint64_t seed,
                                       double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> re(0.3, 2.4);
  std::uniform_real_distribution<double> im(0.25, 1.2);
  std::uniform_int_distribution<int> sign(0, 1);
  std::vector<cplx> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double s = sign(rng) ? 1.0 : -1.0;
    pts.emplace_back(scale * re(rng), s * scale * im(rng));
  }
  return pts;
}

}  // namespace openbethe
