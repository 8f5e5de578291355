// bethe_vectors.hpp
//
// Bethe vectors three ways: the n=2 creation-operator product, the general
// multi-auxiliary trace formula, and the rank-reduction recursion.
//
// Trace formula (auxiliary space a^i_j = C^n for root j of family i):
//
//   Phi = tr_{A_1..A_{n-1}} ( prod->_{i} prod->_{j} [ Rbar_ij
//              D-hat^(i)_{a^i_j}(u_ij + hbar/2)  Rcal_ij ]
//              prod_{i,j} (E_{i+1,i})_{a^i_j} ) Omega
//
//   Rbar_ij = prod<-_{b<i} prod->_{c<=M_b}
//               RRn^(i,b+1)_{a^i_j, a^b_c}(u_ij + u_bc + (i-b) hbar/2)
//   Rcal_ij = prod->_{b<i} prod<-_{c<=M_b}
//               RRn^(i,b+1)_{a^i_j, a^b_c}(u_ij - u_bc + (i-b) hbar/2)
//
// with RRn the normalized reduced R-matrix and the arrow products
// prod-> X_i = X_1...X_m, prod<- X_i = X_m...X_1. The dressing shift
// (i-b) hbar/2 is the convention under which the construction produces
// transfer-matrix eigenvectors and the trace and recursion forms agree;
// see dress_shift() below.

#pragma once

#include <string>
#include <vector>

#include "openbethe/bethe_solver.hpp"
#include "openbethe/common.hpp"
#include "openbethe/reflection.hpp"

namespace openbethe {

enum class VectorMethod { product_n2, trace, recursion };

struct BetheVector {
  Vector state;
  RootFamilies roots;
  VectorMethod method = VectorMethod::trace;
};

namespace detail {

inline void check_nonzero(const Vector& v, const char* what) {
  if (max_abs(v) < 1e-12)
    throw NumericError(std::string(what) +
                       ": degenerate construction produced the zero vector");
}

// Shift, in units of hbar, inside the dressing factors connecting a family-i
// root with a family-b root (b < i). Of the shift conventions appearing in
// the construction, (i-b)/2 is the one under which the trace formula yields
// transfer-matrix eigenvectors; it is also the one the recursion reproduces.
inline double dress_shift(int i, int b) { return 0.5 * static_cast<double>(i - b); }

inline std::string aux_label(int family, int j) {
  return "A" + std::to_string(family) + "_" + std::to_string(j + 1);
}

}  // namespace detail

// Ordered product of the hatted creation operators, n = 2:
//   Phi = d-hat_12(u_1) ... d-hat_12(u_M) Omega,  d-hat_12(u) = d_12(u + hbar/2).
inline BetheVector phi_product_n2(const std::vector<cplx>& roots, const ChainSpec& chain,
                                  const BoundarySpec& b) {
  chain.validate();
  if (chain.n != 2) throw ConfigError("phi_product_n2: requires rank 2");
  Vector v = chain.omega();
  for (auto it = roots.rbegin(); it != roots.rend(); ++it) {
    OperatorMatrix op = d_entry(1, 2, *it + 0.5 * chain.hbar, chain, b);
    v = op.mat * v;
  }
  detail::check_nonzero(v, "phi_product_n2");
  BetheVector out;
  out.state = std::move(v);
  out.roots.M = {static_cast<int>(roots.size())};
  out.roots.roots = {roots};
  out.method = VectorMethod::product_n2;
  return out;
}

namespace detail {

// Shared guard for the multi-auxiliary constructions.
inline void check_capacity(const RootFamilies& rf, const ChainSpec& chain) {
  double aux = std::pow(static_cast<double>(chain.n), rf.total());
  double state = aux * chain.quantum_dim();
  if (state > static_cast<double>(1 << 20))
    throw ConfigError("bethe vector: auxiliary state dimension exceeds the 2^20 guard");
  if (state > 2048.0)
    throw NumericError("bethe vector: dense operator capacity exceeded");
}

// The ordered factor list of the trace formula over the families listed in
// `families` (1-based family indices, increasing). Leg families not listed
// still contribute dressing if they appear in `rf`.
// Returns the product of all factors embedded in `full`.
inline OperatorMatrix dressed_product(const RootFamilies& rf, const ChainSpec& chain,
                                      const BoundarySpec& bnd, const SpaceLayout& full,
                                      const std::vector<int>& families) {
  const cplx hbar = chain.hbar;
  const int n = chain.n;
  OperatorMatrix acc = OperatorMatrix::identity(full);
  for (int i : families) {
    for (int j = 0; j < rf.M[i - 1]; ++j) {
      const cplx uij = rf.roots[i - 1][j];
      const std::string me = aux_label(i, j);
      // Rbar: b descending, c ascending
      for (int b = i - 1; b >= 1; --b)
        for (int c = 0; c < rf.M[b - 1]; ++c) {
          cplx arg = uij + rf.roots[b - 1][c] + dress_shift(i, b) * hbar;
          acc = acc * embed(normalized_reduced_r(arg, i, b + 1, n, hbar, me,
                                                 aux_label(b, c)),
                            full);
        }
      // D-hat^(i) on this auxiliary space
      acc = acc * embed(relabeled(reduced_D(i, uij + 0.5 * hbar, chain, bnd, "a"),
                                  "a", me),
                        full);
      // Rcal: b ascending, c descending
      for (int b = 1; b <= i - 1; ++b)
        for (int c = rf.M[b - 1] - 1; c >= 0; --c) {
          cplx arg = uij - rf.roots[b - 1][c] + dress_shift(i, b) * hbar;
          acc = acc * embed(normalized_reduced_r(arg, i, b + 1, n, hbar, me,
                                                 aux_label(b, c)),
                            full);
        }
    }
  }
  return acc;
}

}  // namespace detail

// Trace formula over all families.
inline BetheVector phi_trace(const RootFamilies& rf, const ChainSpec& chain,
                             const BoundarySpec& bnd) {
  chain.validate();
  if (static_cast<int>(rf.M.size()) != chain.n - 1)
    throw ConfigError("phi_trace: sector length must be n-1");
  detail::check_capacity(rf, chain);
  const int n = chain.n;

  std::vector<std::pair<std::string, int>> aux_spaces;
  std::vector<int> families;
  for (int i = 1; i <= n - 1; ++i) {
    families.push_back(i);
    for (int j = 0; j < rf.M[i - 1]; ++j)
      aux_spaces.emplace_back(detail::aux_label(i, j), n);
  }
  SpaceLayout full = concat(SpaceLayout(aux_spaces), chain.quantum_layout());

  OperatorMatrix acc = detail::dressed_product(rf, chain, bnd, full, families);
  for (int i = 1; i <= n - 1; ++i)
    for (int j = 0; j < rf.M[i - 1]; ++j) {
      OperatorMatrix e(SpaceLayout({{detail::aux_label(i, j), n}}),
                       unit_matrix(n, i + 1, i));
      acc = acc * embed(e, full);
    }
  for (const auto& sp : aux_spaces) acc = partial_trace(acc, sp.first);
  Vector v = acc.mat * chain.omega();
  detail::check_nonzero(v, "phi_trace");
  BetheVector out;
  out.state = std::move(v);
  out.roots = rf;
  out.method = VectorMethod::trace;
  return out;
}

// Recursion formula: the creation row of family 1 acting on the embedded
// rank-(n-1) Bethe vector,
//   Phi = B-hat^(1)(u_11) ... B-hat^(1)(u_1M1) Psi-hat^(1)(Phi^{n-1}) Omega,
// realized here by contracting each family-1 auxiliary space between the
// creation-row index and the e_2 projection of the embedding.
inline BetheVector phi_recursion(const RootFamilies& rf, const ChainSpec& chain,
                                 const BoundarySpec& bnd) {
  chain.validate();
  if (static_cast<int>(rf.M.size()) != chain.n - 1)
    throw ConfigError("phi_recursion: sector length must be n-1");
  const int n = chain.n;
  if (n == 2) {
    BetheVector out = phi_product_n2(rf.roots[0], chain, bnd);
    out.roots = rf;
    out.method = VectorMethod::recursion;
    return out;
  }
  detail::check_capacity(rf, chain);
  const cplx hbar = chain.hbar;
  const int m1 = rf.M[0];

  std::vector<std::pair<std::string, int>> aux_spaces;  // legs first, then inner
  for (int j = 0; j < m1; ++j) aux_spaces.emplace_back(detail::aux_label(1, j), n);
  std::vector<int> inner_families;
  for (int i = 2; i <= n - 1; ++i) {
    inner_families.push_back(i);
    for (int j = 0; j < rf.M[i - 1]; ++j)
      aux_spaces.emplace_back(detail::aux_label(i, j), n);
  }
  SpaceLayout full = concat(SpaceLayout(aux_spaces), chain.quantum_layout());

  OperatorMatrix acc = detail::dressed_product(rf, chain, bnd, full, inner_families);
  for (int i : inner_families)
    for (int j = 0; j < rf.M[i - 1]; ++j) {
      OperatorMatrix e(SpaceLayout({{detail::aux_label(i, j), n}}),
                       unit_matrix(n, i + 1, i));
      acc = acc * embed(e, full);
    }
  for (int i : inner_families)
    for (int j = 0; j < rf.M[i - 1]; ++j)
      acc = partial_trace(acc, detail::aux_label(i, j));

  // acc now acts on the family-1 legs and the quantum space; contract each
  // leg between the creation-row index p_c and the embedding vector e_2.
  const Vector omega = chain.omega();
  const int dh = chain.quantum_dim();
  Vector out_state = Vector::Zero(dh);

  std::vector<OperatorMatrix> creation;  // d_1p(u_1c + hbar/2), p = 1..n
  std::vector<std::vector<Matrix>> row_ops(m1);
  for (int c = 0; c < m1; ++c) {
    cplx w = rf.roots[0][c] + 0.5 * hbar;
    OperatorMatrix D = double_row_D(w, chain, bnd);
    for (int p = 1; p <= n; ++p)
      row_ops[c].push_back(space_block(D, "a", 1, p).mat);
  }

  std::vector<int> assignment(m1, 1);
  while (true) {
    OperatorMatrix w = acc;
    for (int c = 0; c < m1; ++c)
      w = space_block(w, detail::aux_label(1, c), assignment[c], 2);
    Vector contrib = w.mat * omega;
    for (int c = m1 - 1; c >= 0; --c)
      contrib = row_ops[c][assignment[c] - 1] * contrib;
    out_state += contrib;
    int c = m1 - 1;
    while (c >= 0 && assignment[c] == n) {
      assignment[c] = 1;
      --c;
    }
    if (c < 0) break;
    ++assignment[c];
  }

  detail::check_nonzero(out_state, "phi_recursion");
  BetheVector out;
  out.state = std::move(out_state);
  out.roots = rf;
  out.method = VectorMethod::recursion;
  return out;
}

// ---------------------------------------------------------------------------
// Eigenvector checks
// ---------------------------------------------------------------------------

struct EigencheckSample {
  cplx u;
  cplx lambda;           // analytic value, or Rayleigh quotient if fallback
  bool rayleigh_fallback = false;
  double residual = 0.0;  // |d(u) v - lambda v| / (|d(u)| |v|), max-entry norms
};

struct EigencheckReport {
  std::vector<EigencheckSample> samples;
  double max_residual = 0.0;
};

// Checks d(u) v = Lambda(u) v at the given sample points. When weights are
// supplied, Lambda comes from the analytic formula at the vector's roots;
// otherwise the Rayleigh quotient is used and flagged.
inline EigencheckReport eigencheck(const BetheVector& vec, const ChainSpec& chain,
                                   const BoundarySpec& bnd,
                                   const std::vector<cplx>& samples,
                                   const BoundaryWeights* weights = nullptr) {
  if (max_abs(vec.state) == 0.0) throw ConfigError("eigencheck: zero vector");
  EigencheckReport rep;
  for (cplx u : samples) {
    OperatorMatrix d = transfer_matrix(u, chain, bnd);
    Vector dv = d.mat * vec.state;
    EigencheckSample s;
    s.u = u;
    if (weights) {
      s.lambda = lambda_eig(u, vec.roots, *weights);
    } else {
      s.lambda = vec.state.dot(dv) / vec.state.squaredNorm();
      s.rayleigh_fallback = true;
    }
    double denom = max_abs(d.mat) * max_abs(vec.state);
    s.residual = max_abs(Vector(dv - s.lambda * vec.state)) / denom;
    rep.max_residual = std::max(rep.max_residual, s.residual);
    rep.samples.push_back(s);
  }
  return rep;
}

}  // namespace openbethe
