// tensor.hpp
//
// Labeled multi-space tensor algebra: dense complex operators acting on an
// ordered product of finite-dimensional spaces. Basis convention, used
// everywhere: lexicographic ordering of tensor-product basis states with the
// leftmost space slowest-varying.
//
// OperatorMatrix values are treated as immutable after construction: all
// operations are pure functions returning fresh values, so sharing across
// threads is safe.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "openbethe/common.hpp"

namespace openbethe {

struct SpaceLayout {
  // ordered (label, dim)
  std::vector<std::pair<std::string, int>> spaces;

  SpaceLayout() = default;
  SpaceLayout(std::initializer_list<std::pair<std::string, int>> s)
      : spaces(s) {
    validate();
  }
  explicit SpaceLayout(std::vector<std::pair<std::string, int>> s)
      : spaces(std::move(s)) {
    validate();
  }

  void validate() const {
    std::int64_t total = 1;
    for (std::size_t i = 0; i < spaces.size(); ++i) {
      if (spaces[i].second <= 0)
        throw ConfigError("SpaceLayout: non-positive dimension for label '" +
                          spaces[i].first + "'");
      total *= spaces[i].second;
      if (total > std::numeric_limits<int>::max())
        throw ConfigError("SpaceLayout: total dimension overflows index type");
      for (std::size_t j = i + 1; j < spaces.size(); ++j)
        if (spaces[i].first == spaces[j].first)
          throw ConfigError("SpaceLayout: duplicate label '" + spaces[i].first + "'");
    }
  }

  int size() const { return static_cast<int>(spaces.size()); }

  int total_dim() const {
    std::int64_t total = 1;
    for (const auto& s : spaces) total *= s.second;
    return static_cast<int>(total);
  }

  int position(const std::string& label) const {
    for (std::size_t i = 0; i < spaces.size(); ++i)
      if (spaces[i].first == label) return static_cast<int>(i);
    return -1;
  }

  bool has(const std::string& label) const { return position(label) >= 0; }

  int dim_of(const std::string& label) const {
    int p = position(label);
    if (p < 0) throw ConfigError("SpaceLayout: unknown label '" + label + "'");
    return spaces[p].second;
  }

  std::vector<int> dims() const {
    std::vector<int> d(spaces.size());
    for (std::size_t i = 0; i < spaces.size(); ++i) d[i] = spaces[i].second;
    return d;
  }

  // Row-major strides: leftmost space slowest.
  std::vector<int> strides() const {
    std::vector<int> st(spaces.size(), 1);
    for (int i = static_cast<int>(spaces.size()) - 2; i >= 0; --i)
      st[i] = st[i + 1] * spaces[i + 1].second;
    return st;
  }

  bool operator==(const SpaceLayout& other) const { return spaces == other.spaces; }
};

inline SpaceLayout concat(const SpaceLayout& a, const SpaceLayout& b) {
  std::vector<std::pair<std::string, int>> s = a.spaces;
  s.insert(s.end(), b.spaces.begin(), b.spaces.end());
  return SpaceLayout(std::move(s));
}

struct OperatorMatrix {
  SpaceLayout layout;
  Matrix mat;

  OperatorMatrix() = default;
  OperatorMatrix(SpaceLayout l, Matrix m) : layout(std::move(l)), mat(std::move(m)) {
    if (mat.rows() != mat.cols() || mat.rows() != layout.total_dim())
      throw ConfigError("OperatorMatrix: matrix size does not match layout");
    require_finite(mat, "OperatorMatrix");
  }

  int dim() const { return static_cast<int>(mat.rows()); }

  static OperatorMatrix identity(const SpaceLayout& l) {
    return OperatorMatrix(l, Matrix::Identity(l.total_dim(), l.total_dim()));
  }

  static OperatorMatrix zero(const SpaceLayout& l) {
    return OperatorMatrix(l, Matrix::Zero(l.total_dim(), l.total_dim()));
  }
};

// Elementary matrix E_ij (1-based), dim n: single 1 at row i, column j.
inline Matrix unit_matrix(int n, int i, int j) {
  Matrix m = Matrix::Zero(n, n);
  m(i - 1, j - 1) = 1.0;
  return m;
}

inline void check_same_layout(const OperatorMatrix& a, const OperatorMatrix& b,
                              const char* what) {
  if (!(a.layout == b.layout))
    throw ConfigError(std::string(what) + ": layout mismatch");
}

inline OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  check_same_layout(a, b, "operator*");
  return OperatorMatrix(a.layout, a.mat * b.mat);
}

inline OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
  check_same_layout(a, b, "operator+");
  return OperatorMatrix(a.layout, a.mat + b.mat);
}

inline OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
  check_same_layout(a, b, "operator-");
  return OperatorMatrix(a.layout, a.mat - b.mat);
}

inline OperatorMatrix operator*(cplx s, const OperatorMatrix& a) {
  return OperatorMatrix(a.layout, s * a.mat);
}

// Kronecker product on concatenated layouts; labels must be disjoint.
inline OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b) {
  for (const auto& s : b.layout.spaces)
    if (a.layout.has(s.first))
      throw ConfigError("kron: label collision on '" + s.first + "'");
  const int da = a.dim(), db = b.dim();
  Matrix m(da * db, da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j)
      m.block(i * db, j * db, db, db) = a.mat(i, j) * b.mat;
  return OperatorMatrix(concat(a.layout, b.layout), std::move(m));
}

namespace detail {

// Index offsets of a sub-layout inside a target layout: for every basis index
// of the sub-layout, the contribution to the target index.
inline std::vector<int> sub_index_offsets(const SpaceLayout& sub,
                                          const SpaceLayout& target) {
  const auto tstrides = target.strides();
  std::vector<int> pos(sub.size());
  for (int k = 0; k < sub.size(); ++k) {
    int p = target.position(sub.spaces[k].first);
    if (p < 0)
      throw ConfigError("embed: target misses label '" + sub.spaces[k].first + "'");
    if (target.spaces[p].second != sub.spaces[k].second)
      throw ConfigError("embed: dimension mismatch on label '" +
                        sub.spaces[k].first + "'");
    pos[k] = p;
  }
  const int dsub = sub.total_dim();
  std::vector<int> offsets(dsub, 0);
  const auto sdims = sub.dims();
  for (int idx = 0; idx < dsub; ++idx) {
    int rest = idx;
    int off = 0;
    for (int k = sub.size() - 1; k >= 0; --k) {
      int digit = rest % sdims[k];
      rest /= sdims[k];
      off += digit * tstrides[pos[k]];
    }
    offsets[idx] = off;
  }
  return offsets;
}

// Enumerate target-layout base offsets over the complement of `sub`'s labels.
inline std::vector<int> complement_offsets(const SpaceLayout& sub,
                                           const SpaceLayout& target) {
  const auto tstrides = target.strides();
  std::vector<int> cpos;
  for (int p = 0; p < target.size(); ++p)
    if (!sub.has(target.spaces[p].first)) cpos.push_back(p);
  std::vector<int> offsets{0};
  for (int p : cpos) {
    std::vector<int> next;
    next.reserve(offsets.size() * target.spaces[p].second);
    for (int base : offsets)
      for (int d = 0; d < target.spaces[p].second; ++d)
        next.push_back(base + d * tstrides[p]);
    offsets.swap(next);
  }
  return offsets;
}

}  // namespace detail

// Embed op into a larger layout: op on its own labels, identity elsewhere.
// Also serves as a pure basis reordering when the label sets coincide.
inline OperatorMatrix embed(const OperatorMatrix& op, const SpaceLayout& target) {
  const auto sub_off = detail::sub_index_offsets(op.layout, target);
  const auto base_off = detail::complement_offsets(op.layout, target);
  const int dsub = op.dim();
  Matrix m = Matrix::Zero(target.total_dim(), target.total_dim());
  for (int base : base_off)
    for (int r = 0; r < dsub; ++r)
      for (int c = 0; c < dsub; ++c) {
        const cplx v = op.mat(r, c);
        if (v != 0.0) m(base + sub_off[r], base + sub_off[c]) = v;
      }
  return OperatorMatrix(target, std::move(m));
}

// Trace over one named space; the result layout drops that label.
inline OperatorMatrix partial_trace(const OperatorMatrix& op, const std::string& label) {
  int p = op.layout.position(label);
  if (p < 0) throw ConfigError("partial_trace: unknown label '" + label + "'");
  const int d = op.layout.spaces[p].second;
  const int stride = op.layout.strides()[p];

  std::vector<std::pair<std::string, int>> rest_spaces;
  for (int k = 0; k < op.layout.size(); ++k)
    if (k != p) rest_spaces.push_back(op.layout.spaces[k]);
  SpaceLayout rest(std::move(rest_spaces));

  SpaceLayout traced({{label, d}});
  const auto rest_off = detail::complement_offsets(traced, op.layout);
  const int dr = rest.total_dim();
  Matrix m = Matrix::Zero(dr, dr);
  for (int r = 0; r < dr; ++r)
    for (int c = 0; c < dr; ++c) {
      cplx sum = 0.0;
      for (int k = 0; k < d; ++k)
        sum += op.mat(rest_off[r] + k * stride, rest_off[c] + k * stride);
      m(r, c) = sum;
    }
  return OperatorMatrix(std::move(rest), std::move(m));
}

// Matrix element <i| op |j> (1-based) on one named space: contracts that
// space away and returns the operator on the remaining layout.
inline OperatorMatrix space_block(const OperatorMatrix& op, const std::string& label,
                                  int i, int j) {
  int p = op.layout.position(label);
  if (p < 0) throw ConfigError("space_block: unknown label '" + label + "'");
  const int d = op.layout.spaces[p].second;
  if (i < 1 || i > d || j < 1 || j > d)
    throw ConfigError("space_block: index out of range on '" + label + "'");
  const int stride = op.layout.strides()[p];

  std::vector<std::pair<std::string, int>> rest_spaces;
  for (int k = 0; k < op.layout.size(); ++k)
    if (k != p) rest_spaces.push_back(op.layout.spaces[k]);
  SpaceLayout rest(std::move(rest_spaces));

  SpaceLayout picked({{label, d}});
  const auto rest_off = detail::complement_offsets(picked, op.layout);
  const int dr = rest.total_dim();
  Matrix m(dr, dr);
  for (int r = 0; r < dr; ++r)
    for (int c = 0; c < dr; ++c)
      m(r, c) = op.mat(rest_off[r] + (i - 1) * stride, rest_off[c] + (j - 1) * stride);
  return OperatorMatrix(std::move(rest), std::move(m));
}

// Transpose on one named space only.
inline OperatorMatrix partial_transpose(const OperatorMatrix& op, const std::string& label) {
  int p = op.layout.position(label);
  if (p < 0) throw ConfigError("partial_transpose: unknown label '" + label + "'");
  const int d = op.layout.spaces[p].second;
  const int stride = op.layout.strides()[p];
  SpaceLayout picked({{label, d}});
  const auto rest_off = detail::complement_offsets(picked, op.layout);
  Matrix m(op.dim(), op.dim());
  for (int rb : rest_off)
    for (int cb : rest_off)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          m(rb + a * stride, cb + b * stride) = op.mat(rb + b * stride, cb + a * stride);
  return OperatorMatrix(op.layout, std::move(m));
}

// Rename a space label, keeping the matrix.
inline OperatorMatrix relabeled(const OperatorMatrix& op, const std::string& from,
                                const std::string& to) {
  int p = op.layout.position(from);
  if (p < 0) throw ConfigError("relabeled: unknown label '" + from + "'");
  auto spaces = op.layout.spaces;
  spaces[p].first = to;
  return OperatorMatrix(SpaceLayout(std::move(spaces)), op.mat);
}

// Permutation operator P = sum_ij E_ij (x) E_ji on two n-dimensional spaces:
// P(x (x) y) = y (x) x, P^2 = I.
inline OperatorMatrix permutation_op(int n, const std::string& label_a = "1",
                                     const std::string& label_b = "2") {
  if (n < 2) throw ConfigError("permutation_op: rank must be >= 2");
  SpaceLayout l({{label_a, n}, {label_b, n}});
  Matrix m = Matrix::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i * n + j, j * n + i) = 1.0;
  return OperatorMatrix(std::move(l), std::move(m));
}

inline cplx trace(const OperatorMatrix& op) { return op.mat.trace(); }

}  // namespace openbethe
