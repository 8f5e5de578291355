// yangian.hpp
//
// Rational R-matrices (plain, normalized, reduced), gl(n) highest-weight
// representation matrices, evaluation representations of the monodromy
// T(u), its inverse, the quantum determinant and the weight functions.
//
// Conventions, fixed here and used by every downstream module:
//   R(u) = u I(x)I - hbar P           on C^n (x) C^n
//   site operator  L(u) = (u - a) I - hbar sum_ij E_ij (x) pi(E_ji)
// i.e. the polynomial normalization, in which the diagonal vacuum weights are
//   lambda_j(u) = prod_sites (u - a_s - hbar mu_j^(s)).
// T^-1(u) is the matrix inverse of the polynomial T(u); its vacuum weights
// follow the same closed formula as in the series normalization because the
// formula is homogeneous under scalar rescalings of T.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "openbethe/common.hpp"
#include "openbethe/tensor.hpp"

namespace openbethe {

// ---------------------------------------------------------------------------
// R-matrices
// ---------------------------------------------------------------------------

inline OperatorMatrix r_matrix(cplx u, int n, cplx hbar,
                               const std::string& label_a = "1",
                               const std::string& label_b = "2") {
  OperatorMatrix p = permutation_op(n, label_a, label_b);
  Matrix m = u * Matrix::Identity(n * n, n * n) - hbar * p.mat;
  return OperatorMatrix(p.layout, std::move(m));
}

// R(u) / (u - hbar); satisfies RR(u) RR(-u) = I.
inline OperatorMatrix normalized_r(cplx u, int n, cplx hbar,
                                   const std::string& label_a = "1",
                                   const std::string& label_b = "2") {
  if (std::abs(u - hbar) < tol::pole_guard)
    throw NumericError("normalized_r: pole at u = hbar");
  OperatorMatrix r = r_matrix(u, n, hbar, label_a, label_b);
  return OperatorMatrix(r.layout, r.mat / (u - hbar));
}

// Projector I^(k) = sum_{i=k..n} E_ii (1-based k).
inline Matrix lower_projector(int n, int k) {
  Matrix m = Matrix::Zero(n, n);
  for (int i = k - 1; i < n; ++i) m(i, i) = 1.0;
  return m;
}

// Reduced R-matrix (I^(k) (x) I^(p)) R(u) (I^(k) (x) I^(p)), returned on the
// full C^n (x) C^n space. Restricted to indices >= k (for k = p) it is the
// R-matrix of rank n-k+1.
inline OperatorMatrix reduced_r(cplx u, int k, int p, int n, cplx hbar,
                                const std::string& label_a = "1",
                                const std::string& label_b = "2") {
  if (k < 1 || k > n || p < 1 || p > n)
    throw ConfigError("reduced_r: projector index out of range");
  OperatorMatrix r = r_matrix(u, n, hbar, label_a, label_b);
  Matrix proj(n * n, n * n);
  {
    Matrix pk = lower_projector(n, k), pp = lower_projector(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        proj.block(i * n, j * n, n, n) = pk(i, j) * pp;
  }
  return OperatorMatrix(r.layout, proj * r.mat * proj);
}

inline OperatorMatrix normalized_reduced_r(cplx u, int k, int p, int n, cplx hbar,
                                           const std::string& label_a = "1",
                                           const std::string& label_b = "2") {
  if (std::abs(u - hbar) < tol::pole_guard)
    throw NumericError("normalized_reduced_r: pole at u = hbar");
  OperatorMatrix r = reduced_r(u, k, p, n, hbar, label_a, label_b);
  return OperatorMatrix(r.layout, r.mat / (u - hbar));
}

// ---------------------------------------------------------------------------
// gl(n) highest-weight representations
// ---------------------------------------------------------------------------

struct GlRep {
  int n = 0;
  std::vector<cplx> mu;          // highest weight (mu_1, ..., mu_n)
  int dim = 0;
  std::vector<Matrix> gen;       // generator matrices, index (i-1)*n + (j-1)
  int hw_index = 0;              // basis index of the highest weight vector

  const Matrix& E(int i, int j) const { return gen[(i - 1) * n + (j - 1)]; }
};

namespace detail {

inline void check_dominant(const std::vector<cplx>& mu) {
  for (std::size_t i = 0; i + 1 < mu.size(); ++i) {
    cplx d = mu[i] - mu[i + 1];
    double r = std::round(d.real());
    if (std::abs(d.imag()) > 1e-9 || std::abs(d.real() - r) > 1e-9 || r < -0.5)
      throw ConfigError("gl_rep: weight is not dominant (mu_i - mu_{i+1} must be a non-negative integer)");
  }
}

// Degree-m monomial multi-indices in n variables, (m,0,...,0) first.
inline void enumerate_monomials(int n, int m, std::vector<int>& current,
                                std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == n - 1) {
    current.push_back(m - std::accumulate(current.begin(), current.end(), 0));
    out.push_back(current);
    current.pop_back();
    return;
  }
  int used = std::accumulate(current.begin(), current.end(), 0);
  for (int k = m - used; k >= 0; --k) {
    current.push_back(k);
    enumerate_monomials(n, m, current, out);
    current.pop_back();
  }
}

// Sym^m(C^n): generators act as x_i d/dx_j on monomials.
inline GlRep symmetric_power_rep(int n, int m, cplx /*shift*/ = 0.0) {
  std::vector<std::vector<int>> basis;
  std::vector<int> cur;
  enumerate_monomials(n, m, cur, basis);
  const int d = static_cast<int>(basis.size());

  auto index_of = [&](const std::vector<int>& k) {
    for (int b = 0; b < d; ++b)
      if (basis[b] == k) return b;
    return -1;
  };

  GlRep rep;
  rep.n = n;
  rep.mu.assign(n, 0.0);
  rep.mu[0] = static_cast<double>(m);
  rep.dim = d;
  rep.hw_index = 0;
  rep.gen.assign(n * n, Matrix::Zero(d, d));
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      Matrix& g = rep.gen[(i - 1) * n + (j - 1)];
      for (int b = 0; b < d; ++b) {
        if (basis[b][j - 1] == 0) continue;
        std::vector<int> target = basis[b];
        target[j - 1] -= 1;
        target[i - 1] += 1;
        g(index_of(target), b) = static_cast<double>(basis[b][j - 1]);
      }
    }
  return rep;
}

// gl(2) module of arbitrary dominant weight (mu1, mu2), dimension mu1-mu2+1.
inline GlRep gl2_rep(cplx mu1, cplx mu2) {
  int m = static_cast<int>(std::round((mu1 - mu2).real()));
  const int d = m + 1;
  GlRep rep;
  rep.n = 2;
  rep.mu = {mu1, mu2};
  rep.dim = d;
  rep.hw_index = 0;
  rep.gen.assign(4, Matrix::Zero(d, d));
  Matrix& e11 = rep.gen[0];
  Matrix& e12 = rep.gen[1];
  Matrix& e21 = rep.gen[2];
  Matrix& e22 = rep.gen[3];
  for (int k = 0; k < d; ++k) {
    e11(k, k) = mu1 - static_cast<double>(k);
    e22(k, k) = mu2 + static_cast<double>(k);
    if (k + 1 < d) e21(k + 1, k) = 1.0;
    if (k > 0) e12(k - 1, k) = static_cast<double>(k) * (m - k + 1.0);
  }
  return rep;
}

inline void verify_rep(const GlRep& rep) {
  const int n = rep.n;
  // commutation relations [E_ij, E_kl] = delta_jk E_il - delta_il E_kj
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k)
        for (int l = 1; l <= n; ++l) {
          Matrix lhs = rep.E(i, j) * rep.E(k, l) - rep.E(k, l) * rep.E(i, j);
          Matrix rhs = Matrix::Zero(rep.dim, rep.dim);
          if (j == k) rhs += rep.E(i, l);
          if (i == l) rhs -= rep.E(k, j);
          if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, max_abs(Matrix(rep.E(i, j)))))
            throw NumericError("gl_rep: commutation relations violated");
        }
  // highest weight conditions
  Vector omega = Vector::Zero(rep.dim);
  omega(rep.hw_index) = 1.0;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      Vector v = rep.E(i, j) * omega;
      if (i < j && max_abs(v) > 1e-12)
        throw NumericError("gl_rep: raising generator does not annihilate the highest weight vector");
      if (i == j && max_abs(Vector(v - rep.mu[i - 1] * omega)) > 1e-12)
        throw NumericError("gl_rep: wrong diagonal weight on the highest weight vector");
    }
}

}  // namespace detail

// Supported weight classes: fundamental (1,0,...,0) and one-row (m,0,...,0)
// for any n via Sym^m(C^n); arbitrary dominant (mu1, mu2) for gl(2).
inline GlRep gl_rep(int n, const std::vector<cplx>& mu) {
  if (n < 2) throw ConfigError("gl_rep: rank must be >= 2");
  if (static_cast<int>(mu.size()) != n)
    throw ConfigError("gl_rep: weight length must equal the rank");
  detail::check_dominant(mu);
  GlRep rep;
  if (n == 2) {
    rep = detail::gl2_rep(mu[0], mu[1]);
  } else {
    bool one_row = true;
    for (int i = 1; i < n; ++i)
      if (std::abs(mu[i]) > 1e-12) one_row = false;
    double m0 = mu[0].real();
    if (!one_row || std::abs(mu[0].imag()) > 1e-12 ||
        std::abs(m0 - std::round(m0)) > 1e-9 || m0 < -0.5)
      throw ConfigError(
          "gl_rep: unsupported weight class for n >= 3 (need one-row (m,0,...,0))");
    rep = detail::symmetric_power_rep(n, static_cast<int>(std::round(m0)));
  }
  detail::verify_rep(rep);
  return rep;
}

// Weyl dimension formula for gl(n): prod_{i<j} (mu_i - mu_j + j - i)/(j - i).
inline double weyl_dim(const std::vector<cplx>& mu) {
  double d = 1.0;
  int n = static_cast<int>(mu.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      d *= (mu[i] - mu[j] + static_cast<double>(j - i)).real() / (j - i);
  return d;
}

// ---------------------------------------------------------------------------
// Chains of evaluation representations
// ---------------------------------------------------------------------------

struct SiteSpec {
  GlRep rep;
  cplx a = 0.0;  // evaluation shift
};

struct ChainSpec {
  int n = 0;
  cplx hbar = 1.0;
  std::vector<SiteSpec> sites;

  void validate() const {
    if (n < 2) throw ConfigError("ChainSpec: rank must be >= 2");
    if (hbar == 0.0) throw ConfigError("ChainSpec: hbar must be nonzero");
    if (sites.empty()) throw ConfigError("ChainSpec: need at least one site");
    for (const auto& s : sites)
      if (s.rep.n != n) throw ConfigError("ChainSpec: site rank mismatch");
  }

  static std::string site_label(int i) { return "s" + std::to_string(i + 1); }

  SpaceLayout quantum_layout() const {
    std::vector<std::pair<std::string, int>> sp;
    for (std::size_t i = 0; i < sites.size(); ++i)
      sp.emplace_back(site_label(static_cast<int>(i)), sites[i].rep.dim);
    return SpaceLayout(std::move(sp));
  }

  int quantum_dim() const { return quantum_layout().total_dim(); }

  // Pseudo-vacuum: tensor product of the per-site highest weight vectors.
  Vector omega() const {
    Vector v = Vector::Zero(quantum_dim());
    v(0) = 1.0;  // hw vectors are basis index 0 in every supported class
    return v;
  }
};

// Single-site operator on {aux, site}: (u - a) I - hbar sum E_ij (x) pi(E_ji).
inline OperatorMatrix site_T(cplx u, const SiteSpec& site, int n, cplx hbar,
                             const std::string& aux_label = "a",
                             const std::string& site_label = "s1") {
  const int d = site.rep.dim;
  SpaceLayout layout({{aux_label, n}, {site_label, d}});
  Matrix m = Matrix::Zero(n * d, n * d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Matrix blk = -hbar * site.rep.E(j + 1, i + 1);
      if (i == j) blk += (u - site.a) * Matrix::Identity(d, d);
      m.block(i * d, j * d, d, d) = blk;
    }
  return OperatorMatrix(std::move(layout), std::move(m));
}

// Monodromy of the whole chain on {aux} (x) H, site 1 leftmost in the product.
inline OperatorMatrix chain_T(cplx u, const ChainSpec& chain,
                              const std::string& aux_label = "a") {
  chain.validate();
  SpaceLayout full = concat(SpaceLayout({{aux_label, chain.n}}), chain.quantum_layout());
  OperatorMatrix t = OperatorMatrix::identity(full);
  for (std::size_t i = 0; i < chain.sites.size(); ++i) {
    OperatorMatrix li = site_T(u, chain.sites[i], chain.n, chain.hbar, aux_label,
                               ChainSpec::site_label(static_cast<int>(i)));
    t = t * embed(li, full);
  }
  return t;
}

// Matrix inverse of chain_T(u), with a condition-number guard: beyond the
// threshold the spectral point is reported unusable and must be resampled.
inline OperatorMatrix chain_T_inverse(cplx u, const ChainSpec& chain,
                                      const std::string& aux_label = "a") {
  OperatorMatrix t = chain_T(u, chain, aux_label);
  Eigen::PartialPivLU<Matrix> lu(t.mat);
  Matrix inv = lu.inverse();
  if (!inv.allFinite())
    throw NumericError("chain_T_inverse: singular monodromy at u = (" +
                       std::to_string(u.real()) + "," + std::to_string(u.imag()) + ")");
  double cond = t.mat.cwiseAbs().rowwise().sum().maxCoeff() *
                inv.cwiseAbs().rowwise().sum().maxCoeff();
  if (cond > tol::inversion_condition)
    throw NumericError("chain_T_inverse: condition number " + std::to_string(cond) +
                       " beyond threshold at u = (" + std::to_string(u.real()) + "," +
                       std::to_string(u.imag()) + "); resample");
  return OperatorMatrix(t.layout, std::move(inv));
}

// Monodromy entry t_ij(u) as an operator on the quantum space alone.
inline OperatorMatrix monodromy_entry(int i, int j, cplx u, const ChainSpec& chain,
                                      const std::string& aux_label = "a") {
  return space_block(chain_T(u, chain, aux_label), aux_label, i, j);
}

// Quantum determinant: sum over permutations of shifted monodromy entries,
//   qdet(u) = sum_sigma sgn(sigma) t_{1 sigma(1)}(u + (1-n) hbar) ... t_{n sigma(n)}(u),
// an operator on H acting as a scalar on each irreducible invariant subspace.
inline OperatorMatrix quantum_determinant(cplx u, const ChainSpec& chain) {
  chain.validate();
  const int n = chain.n;
  if (n > 4) throw ConfigError("quantum_determinant: rank guard exceeded (n <= 4)");
  // cache the n^2 entry operators at each of the n shifted arguments
  std::vector<std::vector<OperatorMatrix>> entries(n);
  for (int i = 0; i < n; ++i) {
    cplx ui = u + static_cast<double>(i + 1 - n) * chain.hbar;
    OperatorMatrix t = chain_T(ui, chain);
    entries[i].reserve(n);
    for (int j = 1; j <= n; ++j)
      entries[i].push_back(space_block(t, "a", i + 1, j));
  }
  SpaceLayout h = chain.quantum_layout();
  OperatorMatrix acc = OperatorMatrix::zero(h);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  do {
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (perm[i] > perm[j]) ++inversions;
    OperatorMatrix term = OperatorMatrix::identity(h);
    for (int i = 0; i < n; ++i) term = term * entries[i][perm[i]];
    acc = acc + ((inversions % 2 == 0) ? cplx(1.0) : cplx(-1.0)) * term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc;
}

// ---------------------------------------------------------------------------
// Vacuum weight functions
// ---------------------------------------------------------------------------

// lambda_j(u) = prod_sites (u - a_s - hbar mu_j^(s)), 1-based j.
inline cplx lambda_weight(int j, cplx u, const ChainSpec& chain) {
  cplx p = 1.0;
  for (const auto& s : chain.sites) p *= u - s.a - chain.hbar * s.rep.mu[j - 1];
  return p;
}

// Vacuum weights of the inverse monodromy,
//   lambda'_i(u) = (prod_{k<i} lambda_k(u+k hbar)/lambda_k(u+(k-1) hbar))
//                  / lambda_i(u+(i-1) hbar).
// The hbar used in the shifts is passed explicitly so that sign-flipped
// variants can be probed; callers normally pass chain.hbar.
inline cplx lambda_prime_weight(int i, cplx u, const ChainSpec& chain, cplx hbar) {
  cplx p = 1.0;
  for (int k = 1; k < i; ++k)
    p *= lambda_weight(k, u + static_cast<double>(k) * hbar, chain) /
         lambda_weight(k, u + static_cast<double>(k - 1) * hbar, chain);
  return p / lambda_weight(i, u + static_cast<double>(i - 1) * hbar, chain);
}

inline cplx lambda_prime_weight(int i, cplx u, const ChainSpec& chain) {
  return lambda_prime_weight(i, u, chain, chain.hbar);
}

// ---------------------------------------------------------------------------
// Identity residuals (consumed by the test suites and the identity runner)
// ---------------------------------------------------------------------------

inline double ybe_residual(int n, cplx hbar, cplx u1, cplx u2, cplx u3) {
  SpaceLayout full({{"1", n}, {"2", n}, {"3", n}});
  auto R = [&](cplx u, const std::string& a, const std::string& b) {
    return embed(r_matrix(u, n, hbar, a, b), full);
  };
  OperatorMatrix lhs = R(u1 - u2, "1", "2") * R(u1 - u3, "1", "3") * R(u2 - u3, "2", "3");
  OperatorMatrix rhs = R(u2 - u3, "2", "3") * R(u1 - u3, "1", "3") * R(u1 - u2, "1", "2");
  return rel_diff(lhs.mat, rhs.mat);
}

inline double unitarity_residual(int n, cplx hbar, cplx u) {
  OperatorMatrix lhs = r_matrix(u, n, hbar) * r_matrix(-u, n, hbar);
  Matrix rhs = (u - hbar) * (-u - hbar) * Matrix::Identity(n * n, n * n);
  return rel_diff(lhs.mat, rhs);
}

// t = transposition of the first space.
inline double crossing_unitarity_residual(int n, cplx hbar, cplx u) {
  OperatorMatrix rt1 = partial_transpose(r_matrix(u, n, hbar), "1");
  OperatorMatrix rt2 = partial_transpose(
      r_matrix(-u + static_cast<double>(n) * hbar, n, hbar), "1");
  Matrix rhs = u * (-u + static_cast<double>(n) * hbar) * Matrix::Identity(n * n, n * n);
  return rel_diff((rt1 * rt2).mat, rhs);
}

inline double gl_invariance_residual(int n, cplx hbar, cplx u, const Matrix& m) {
  Matrix mm(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      mm.block(i * n, j * n, n, n) = m(i, j) * m;
  Matrix r = r_matrix(u, n, hbar).mat;
  return rel_diff(Matrix(r * mm), Matrix(mm * r));
}

// RTT relation R_12(u-v) T_1(u) T_2(v) = T_2(v) T_1(u) R_12(u-v).
inline double rtt_residual(const ChainSpec& chain, cplx u, cplx v) {
  OperatorMatrix t1 = chain_T(u, chain, "a1");
  OperatorMatrix t2 = chain_T(v, chain, "a2");
  SpaceLayout full = concat(SpaceLayout({{"a1", chain.n}, {"a2", chain.n}}),
                            chain.quantum_layout());
  OperatorMatrix T1 = embed(t1, full);
  OperatorMatrix T2 = embed(t2, full);
  OperatorMatrix R = embed(r_matrix(u - v, chain.n, chain.hbar, "a1", "a2"), full);
  return rel_diff((R * T1 * T2).mat, (T2 * T1 * R).mat);
}

}  // namespace openbethe
