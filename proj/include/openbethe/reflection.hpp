// reflection.hpp
//
// Boundary matrices K+-(u), the double-row monodromy D(u) = T(u) K-(u) T^-1(-u),
// the open transfer matrix d(u) = tr(K+(u) D(u)), the boundary vacuum weights,
// and the reduced operators of the nesting.
//
// The diagonal vacuum eigenvalues of D(u) admit two closed forms that differ
// in the shift convention of the correction denominators:
//
//   CorrectionShift::level     K_i(u) = kappa_i + hbar/(2u-(i-1)hbar) sum_{k<i} kappa_k
//                              L_i(u) = g_i - sum_{k<i} hbar/(2u-k hbar) g_k
//   CorrectionShift::half_step K_i(u) = kappa_i + sum_{k<i} kappa_k hbar/(2u-(i-2)hbar/2)
//                              L_i(u) = g_i - sum_{k<i} hbar/(2u-(k-1)hbar/2) g_k
//
// with g_i(u) = K_i(u) lambda_i(u) lambda'_i(-u). The `level` convention is the
// one consistent with the reduced-operator construction and the transfer-matrix
// decomposition; boundary_weights() validates it against direct operator action
// and records a structured warning on any discrepancy (the operator action is
// authoritative, never silently overridden).

#pragma once

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "openbethe/common.hpp"
#include "openbethe/tensor.hpp"
#include "openbethe/yangian.hpp"

namespace openbethe {

enum class KPlusMode { identity, dual_of_k_minus };

struct BoundarySpec {
  int a_split = 1;  // number of leading (u - c_minus) entries, in [0, n]
  cplx c_minus = 0.0;
  KPlusMode k_plus_mode = KPlusMode::identity;

  void validate(int n) const {
    if (a_split < 0 || a_split > n)
      throw ConfigError("BoundarySpec: a_split must lie in [0, n]");
  }
};

// kappa^-_i(u): diagonal entries of K^-(u).
inline cplx kappa_minus(int i, cplx u, const BoundarySpec& b) {
  return (i <= b.a_split) ? (u - b.c_minus) : (-u - b.c_minus);
}

inline OperatorMatrix k_minus(cplx u, int n, const BoundarySpec& b,
                              const std::string& label = "a") {
  b.validate(n);
  Matrix m = Matrix::Zero(n, n);
  for (int i = 1; i <= n; ++i) m(i - 1, i - 1) = kappa_minus(i, u, b);
  return OperatorMatrix(SpaceLayout({{label, n}}), std::move(m));
}

// kappa^+_i(u): diagonal entries of K^+(u). In dual mode K^+(u)^t = K^-(-u + n hbar/2);
// for diagonal matrices the transpose is trivial.
inline cplx kappa_plus(int i, cplx u, int n, const BoundarySpec& b, cplx hbar) {
  if (b.k_plus_mode == KPlusMode::identity) return 1.0;
  return kappa_minus(i, -u + 0.5 * static_cast<double>(n) * hbar, b);
}

inline OperatorMatrix k_plus(cplx u, int n, const BoundarySpec& b, cplx hbar,
                             const std::string& label = "a") {
  b.validate(n);
  Matrix m = Matrix::Zero(n, n);
  for (int i = 1; i <= n; ++i) m(i - 1, i - 1) = kappa_plus(i, u, n, b, hbar);
  return OperatorMatrix(SpaceLayout({{label, n}}), std::move(m));
}

// ---------------------------------------------------------------------------
// Double-row monodromy and transfer matrix
// ---------------------------------------------------------------------------

// D(u) = T(u) K^-(u) T^-1(-u) on {aux} (x) H.
inline OperatorMatrix double_row_D(cplx u, const ChainSpec& chain,
                                   const BoundarySpec& b,
                                   const std::string& aux_label = "a") {
  b.validate(chain.n);
  OperatorMatrix t = chain_T(u, chain, aux_label);
  OperatorMatrix tinv = chain_T_inverse(-u, chain, aux_label);
  OperatorMatrix k = embed(k_minus(u, chain.n, b, aux_label), t.layout);
  return t * k * tinv;
}

// d_ij(u) as an operator on the quantum space.
inline OperatorMatrix d_entry(int i, int j, cplx u, const ChainSpec& chain,
                              const BoundarySpec& b) {
  return space_block(double_row_D(u, chain, b), "a", i, j);
}

// d(u) = tr_aux(K^+(u) D(u)), an operator on the quantum space.
inline OperatorMatrix transfer_matrix(cplx u, const ChainSpec& chain,
                                      const BoundarySpec& b) {
  OperatorMatrix d = double_row_D(u, chain, b);
  OperatorMatrix kp = embed(k_plus(u, chain.n, b, chain.hbar, "a"), d.layout);
  return partial_trace(kp * d, "a");
}

// ---------------------------------------------------------------------------
// Reduced operators of the nesting
// ---------------------------------------------------------------------------

// D-hat^(k)(u) = sum_{i,j >= k} E_ij (x) d^(k)_ij(u) on the full C^n (x) H,
//   d^(k)_ij(u) = d_ij(u + (k-1) hbar/2)
//                 + delta_ij (hbar/2u) sum_{a<k} d_aa(u + (k-1) hbar/2).
inline OperatorMatrix reduced_D(int k, cplx u, const ChainSpec& chain,
                                const BoundarySpec& b,
                                const std::string& aux_label = "a") {
  if (k < 1 || k > chain.n) throw ConfigError("reduced_D: level out of range");
  if (k >= 2 && std::abs(u) < tol::sample_denominator)
    throw NumericError("reduced_D: pole of the hbar/2u correction at u = 0");
  cplx w = u + 0.5 * static_cast<double>(k - 1) * chain.hbar;
  OperatorMatrix dw = double_row_D(w, chain, b, aux_label);
  const int n = chain.n;
  const int dh = chain.quantum_dim();

  Matrix out = Matrix::Zero(n * dh, n * dh);
  for (int i = k; i <= n; ++i)
    for (int j = k; j <= n; ++j)
      out.block((i - 1) * dh, (j - 1) * dh, dh, dh) =
          dw.mat.block((i - 1) * dh, (j - 1) * dh, dh, dh);
  if (k >= 2) {
    Matrix corr = Matrix::Zero(dh, dh);
    for (int a = 1; a < k; ++a)
      corr += dw.mat.block((a - 1) * dh, (a - 1) * dh, dh, dh);
    corr *= chain.hbar / (2.0 * u);
    for (int i = k; i <= n; ++i)
      out.block((i - 1) * dh, (i - 1) * dh, dh, dh) += corr;
  }
  return OperatorMatrix(dw.layout, std::move(out));
}

// Image of d_ij(u) under the rank embedding:
//   tau(d_ij(u)) = d_{i+1,j+1}(u + hbar/2) + delta_ij (hbar/2u) d_11(u + hbar/2).
inline OperatorMatrix tau_d_entry(int i, int j, cplx u, const ChainSpec& chain,
                                  const BoundarySpec& b) {
  if (std::abs(u) < tol::sample_denominator)
    throw NumericError("tau_d_entry: pole of the hbar/2u correction at u = 0");
  cplx w = u + 0.5 * chain.hbar;
  OperatorMatrix out = d_entry(i + 1, j + 1, w, chain, b);
  if (i == j) {
    OperatorMatrix d11 = d_entry(1, 1, w, chain, b);
    out = out + (chain.hbar / (2.0 * u)) * d11;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boundary vacuum weights
// ---------------------------------------------------------------------------

enum class CorrectionShift { level, half_step };

// kappa, calK, g = calK * lambda * lambda'(-.), and Lambda (diagonal vacuum
// eigenvalue of D) for one convention.
struct BoundaryWeights {
  int n = 0;
  cplx hbar = 0.0;
  int a_split = 0;
  CorrectionShift shift = CorrectionShift::level;
  std::vector<std::function<cplx(cplx)>> kappa;    // 1-based: kappa[i-1]
  std::vector<std::function<cplx(cplx)>> calK;
  std::vector<std::function<cplx(cplx)>> g;        // calK_i lambda_i lambda'_i(-u)
  std::vector<std::function<cplx(cplx)>> Lambda;   // d_ii(u) vacuum eigenvalue
  bool validated = false;
  double validation_max_rel_err = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline cplx calK_of(int i, cplx u, const BoundarySpec& b, cplx hbar, int /*n*/,
                    CorrectionShift shift) {
  cplx sum = 0.0;
  for (int k = 1; k < i; ++k) {
    cplx den = (shift == CorrectionShift::level)
                   ? (2.0 * u - static_cast<double>(i - 1) * hbar)
                   : (2.0 * u - 0.5 * static_cast<double>(i - 2) * hbar);
    sum += kappa_minus(k, u, b) * hbar / den;
  }
  return kappa_minus(i, u, b) + sum;
}

}  // namespace detail

// Builds the closed-form weight functions in the requested convention and,
// by default, validates them against the operator action of d_ii(u) on the
// pseudo-vacuum at randomly sampled points. On a discrepancy the mismatch is
// recorded as a structured warning; the operator action is authoritative.
inline BoundaryWeights boundary_weights(const ChainSpec& chain, const BoundarySpec& b,
                                        CorrectionShift shift = CorrectionShift::level,
                                        bool validate = true,
                                        std::uint64_t validation_seed = 20240917ull) {
  chain.validate();
  b.validate(chain.n);
  const int n = chain.n;
  const cplx hbar = chain.hbar;

  BoundaryWeights w;
  w.n = n;
  w.hbar = hbar;
  w.a_split = b.a_split;
  w.shift = shift;
  for (int i = 1; i <= n; ++i) {
    w.kappa.push_back([i, b](cplx u) { return kappa_minus(i, u, b); });
    w.calK.push_back([i, b, hbar, n, shift](cplx u) {
      return detail::calK_of(i, u, b, hbar, n, shift);
    });
    w.g.push_back([i, b, hbar, n, shift, chain](cplx u) {
      return detail::calK_of(i, u, b, hbar, n, shift) * lambda_weight(i, u, chain) *
             lambda_prime_weight(i, -u, chain);
    });
  }
  // Lambda closures hold their own copy of the g closures so the returned
  // struct stays self-contained.
  std::vector<std::function<cplx(cplx)>> g_copy = w.g;
  for (int i = 1; i <= n; ++i) {
    w.Lambda.emplace_back([i, hbar, shift, g_copy](cplx u) {
      cplx val = g_copy[i - 1](u);
      for (int k = 1; k < i; ++k) {
        cplx den = (shift == CorrectionShift::level)
                       ? (2.0 * u - static_cast<double>(k) * hbar)
                       : (2.0 * u - 0.5 * static_cast<double>(k - 1) * hbar);
        val -= hbar / den * g_copy[k - 1](u);
      }
      return val;
    });
  }

  if (validate) {
    const Vector omega = chain.omega();
    auto pts = sample_points(10, validation_seed, std::abs(hbar));
    double worst = 0.0;
    for (cplx u : pts) {
      OperatorMatrix D = double_row_D(u, chain, b);
      for (int i = 1; i <= n; ++i) {
        Vector v = space_block(D, "a", i, i).mat * omega;
        cplx scalar = v(0);
        cplx formula = w.Lambda[i - 1](u);
        double err = std::abs(scalar - formula) /
                     std::max({1.0, std::abs(scalar), std::abs(formula)});
        worst = std::max(worst, err);
      }
    }
    w.validation_max_rel_err = worst;
    w.validated = worst < tol::weight_match;
    if (!w.validated) {
      std::ostringstream os;
      os << "boundary_weights: closed-form Lambda_i deviates from operator action by "
         << worst << " (convention "
         << (shift == CorrectionShift::level ? "level" : "half_step")
         << "); operator-action values are authoritative";
      w.warnings.push_back(os.str());
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Highest-weight checks (operator-action oracle)
// ---------------------------------------------------------------------------

struct HwSample {
  cplx u;
  double annihilation_residual = 0.0;            // max over i>j of |d_ij(u) Omega| / |D|
  std::vector<cplx> diagonal_scalars;            // d_ii(u) Omega / Omega
  double eigenvector_residual = 0.0;             // max over i of |d_ii Omega - s_i Omega|
};

struct HwReport {
  std::vector<HwSample> samples;
  double max_annihilation = 0.0;
  double max_eigenvector_residual = 0.0;
  // deviation of the closed-form Lambda_i from the operator scalars
  double max_level_dev = 0.0;
  double max_half_step_dev = 0.0;
};

// Verifies d_ij(u) Omega = 0 for i > j and extracts the diagonal scalars,
// comparing them against both closed-form conventions.
inline HwReport hw_check(const ChainSpec& chain, const BoundarySpec& b,
                         const std::vector<cplx>& samples) {
  chain.validate();
  const int n = chain.n;
  const Vector omega = chain.omega();
  BoundaryWeights level = boundary_weights(chain, b, CorrectionShift::level, false);
  BoundaryWeights half = boundary_weights(chain, b, CorrectionShift::half_step, false);

  HwReport rep;
  for (cplx u : samples) {
    OperatorMatrix D = double_row_D(u, chain, b);
    double scale = max_abs(D.mat);
    HwSample s;
    s.u = u;
    for (int i = 1; i <= n; ++i) {
      for (int j = 1; j < i; ++j) {
        Vector v = space_block(D, "a", i, j).mat * omega;
        s.annihilation_residual = std::max(s.annihilation_residual, max_abs(v) / scale);
      }
      Vector v = space_block(D, "a", i, i).mat * omega;
      cplx scalar = v(0);
      s.diagonal_scalars.push_back(scalar);
      s.eigenvector_residual =
          std::max(s.eigenvector_residual, max_abs(Vector(v - scalar * omega)) / scale);
      auto dev = [&](const BoundaryWeights& w) {
        cplx f = w.Lambda[i - 1](u);
        return std::abs(scalar - f) / std::max({1.0, std::abs(scalar), std::abs(f)});
      };
      rep.max_level_dev = std::max(rep.max_level_dev, dev(level));
      rep.max_half_step_dev = std::max(rep.max_half_step_dev, dev(half));
    }
    rep.max_annihilation = std::max(rep.max_annihilation, s.annihilation_residual);
    rep.max_eigenvector_residual =
        std::max(rep.max_eigenvector_residual, s.eigenvector_residual);
    rep.samples.push_back(std::move(s));
  }
  if (rep.max_eigenvector_residual > 1e-8)
    throw NumericError("hw_check: pseudo-vacuum is not an eigenvector of d_ii(u)");
  return rep;
}

// ---------------------------------------------------------------------------
// Identity residuals
// ---------------------------------------------------------------------------

// Reflection equation R_12(u1-u2) X_1(u1) R_12(u1+u2) X_2(u2)
//                   = X_2(u2) R_12(u1+u2) X_1(u1) R_12(u1-u2)
// for a matrix-valued function X of one spectral parameter, possibly with a
// quantum-space tail shared by both factors.
inline double reflection_residual(const std::function<OperatorMatrix(cplx, std::string)>& X,
                                  int n, cplx hbar, cplx u1, cplx u2,
                                  const SpaceLayout& tail = SpaceLayout()) {
  SpaceLayout full = concat(SpaceLayout({{"r1", n}, {"r2", n}}), tail);
  OperatorMatrix x1 = embed(X(u1, "r1"), full);
  OperatorMatrix x2 = embed(X(u2, "r2"), full);
  OperatorMatrix rm = embed(r_matrix(u1 - u2, n, hbar, "r1", "r2"), full);
  OperatorMatrix rp = embed(r_matrix(u1 + u2, n, hbar, "r1", "r2"), full);
  OperatorMatrix lhs = rm * x1 * rp * x2;
  OperatorMatrix rhs = x2 * rp * x1 * rm;
  return rel_diff(lhs.mat, rhs.mat);
}

inline double k_minus_reflection_residual(int n, cplx hbar, const BoundarySpec& b,
                                          cplx u1, cplx u2) {
  auto X = [&](cplx u, std::string label) { return k_minus(u, n, b, label); };
  return reflection_residual(X, n, hbar, u1, u2);
}

inline double double_row_reflection_residual(const ChainSpec& chain, const BoundarySpec& b,
                                             cplx u1, cplx u2) {
  auto X = [&](cplx u, std::string label) {
    return double_row_D(u, chain, b, label);
  };
  return reflection_residual(X, chain.n, chain.hbar, u1, u2, chain.quantum_layout());
}

// Dual reflection equation for K^+; callers can pass any diagonal candidate,
// which makes sign-mutation tests straightforward.
inline double dual_reflection_residual(const std::function<OperatorMatrix(cplx, std::string)>& kp,
                                       int n, cplx hbar, cplx u1, cplx u2) {
  SpaceLayout full({{"r1", n}, {"r2", n}});
  OperatorMatrix k1 = embed(partial_transpose(kp(u1, "r1"), "r1"), full);
  OperatorMatrix k2 = embed(partial_transpose(kp(u2, "r2"), "r2"), full);
  OperatorMatrix ra = embed(r_matrix(u2 - u1, n, hbar, "r1", "r2"), full);
  OperatorMatrix rb = embed(
      r_matrix(-u1 - u2 + static_cast<double>(n) * hbar, n, hbar, "r1", "r2"), full);
  OperatorMatrix lhs = ra * k1 * rb * k2;
  OperatorMatrix rhs = k2 * rb * k1 * ra;
  return rel_diff(lhs.mat, rhs.mat);
}

inline double k_plus_dual_reflection_residual(int n, cplx hbar, const BoundarySpec& b,
                                              cplx u1, cplx u2) {
  auto kp = [&](cplx u, std::string label) { return k_plus(u, n, b, hbar, label); };
  return dual_reflection_residual(kp, n, hbar, u1, u2);
}

inline double transfer_commutativity_residual(const ChainSpec& chain, const BoundarySpec& b,
                                              cplx u, cplx v) {
  OperatorMatrix du = transfer_matrix(u, chain, b);
  OperatorMatrix dv = transfer_matrix(v, chain, b);
  double scale = max_abs(du.mat) * max_abs(dv.mat);
  if (scale == 0.0) return 0.0;
  return max_abs(Matrix(du.mat * dv.mat - dv.mat * du.mat)) / scale;
}

// Reduced reflection equation for D-hat^(k), tested in the coset sense: both
// sides applied to the pseudo-vacuum (the left ideal annihilates Omega).
inline double reduced_reflection_on_vacuum_residual(int k, const ChainSpec& chain,
                                                    const BoundarySpec& b,
                                                    cplx u1, cplx u2) {
  const int n = chain.n;
  SpaceLayout full = concat(SpaceLayout({{"r1", n}, {"r2", n}}), chain.quantum_layout());
  OperatorMatrix d1 = embed(reduced_D(k, u1, chain, b, "r1"), full);
  OperatorMatrix d2 = embed(reduced_D(k, u2, chain, b, "r2"), full);
  OperatorMatrix rm = embed(reduced_r(u1 - u2, k, k, n, chain.hbar, "r1", "r2"), full);
  OperatorMatrix rp = embed(reduced_r(u1 + u2, k, k, n, chain.hbar, "r1", "r2"), full);
  Matrix lhs = (rm * d1 * rp * d2).mat;
  Matrix rhs = (d2 * rp * d1 * rm).mat;

  // columns of the identity on r1 (x) r2 tensored with Omega
  const Vector omega = chain.omega();
  const int dh = chain.quantum_dim();
  Matrix slab = Matrix::Zero(n * n * dh, n * n);
  for (int c = 0; c < n * n; ++c)
    slab.block(c * dh, c, dh, 1) = omega;
  Matrix l = lhs * slab, r = rhs * slab;
  return rel_diff(l, r);
}

}  // namespace openbethe
