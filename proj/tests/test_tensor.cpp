// Labeled tensor engine: construction, embedding, partial traces and the
// basis convention (lexicographic, leftmost space slowest).

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "openbethe/tensor.hpp"

using namespace openbethe;

namespace {

Matrix random_matrix(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(dist(rng), dist(rng));
  return m;
}

// Independent oracle for operators permuting tensor factors: act on basis
// index tuples directly, never through embed().
Matrix swap_oracle(const std::vector<int>& dims, int a, int b) {
  int total = 1;
  for (int d : dims) total *= d;
  Matrix m = Matrix::Zero(total, total);
  for (int col = 0; col < total; ++col) {
    std::vector<int> digits(dims.size());
    int rest = col;
    for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
      digits[k] = rest % dims[k];
      rest /= dims[k];
    }
    std::swap(digits[a], digits[b]);
    int row = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) row = row * dims[k] + digits[k];
    m(row, col) = 1.0;
  }
  return m;
}

}  // namespace

TEST_CASE("space layout invariants") {
  SpaceLayout l({{"a", 2}, {"q", 3}});
  CHECK(l.total_dim() == 6);
  CHECK(l.dim_of("q") == 3);
  CHECK_THROWS_AS(SpaceLayout({{"a", 2}, {"a", 3}}), ConfigError);
  CHECK_THROWS_AS(SpaceLayout({{"a", 0}}), ConfigError);
  // total dimension must not overflow the index type
  CHECK_THROWS_AS(SpaceLayout({{"a", 100000}, {"b", 100000}, {"c", 100000}}), ConfigError);
}

TEST_CASE("operator matrix finiteness and shape guards") {
  SpaceLayout l({{"a", 2}});
  CHECK_THROWS_AS(OperatorMatrix(l, Matrix::Zero(3, 3)), ConfigError);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(OperatorMatrix(l, bad), NumericError);
}

TEST_CASE("kron basics") {
  OperatorMatrix i2 = OperatorMatrix::identity(SpaceLayout({{"a", 2}}));
  OperatorMatrix i3 = OperatorMatrix::identity(SpaceLayout({{"b", 3}}));
  OperatorMatrix k = kron(i2, i3);
  CHECK(k.dim() == 6);
  CHECK(rel_diff(k.mat, Matrix(Matrix::Identity(6, 6))) == 0.0);

  // E_12 (x) E_21 has its single 1 at row 2, column 3 (1-based lexicographic)
  OperatorMatrix e12(SpaceLayout({{"x", 2}}), unit_matrix(2, 1, 2));
  OperatorMatrix e21(SpaceLayout({{"y", 2}}), unit_matrix(2, 2, 1));
  OperatorMatrix prod = kron(e12, e21);
  Matrix expected = Matrix::Zero(4, 4);
  expected(1, 2) = 1.0;
  CHECK(rel_diff(prod.mat, expected) == 0.0);

  CHECK_THROWS_AS(kron(i2, OperatorMatrix::identity(SpaceLayout({{"a", 3}}))), ConfigError);
}

TEST_CASE("kron bilinearity") {
  std::mt19937_64 rng(7);
  SpaceLayout la({{"a", 2}}), lb({{"b", 3}});
  OperatorMatrix x1(la, random_matrix(2, rng)), x2(la, random_matrix(2, rng));
  OperatorMatrix y(lb, random_matrix(3, rng));
  cplx s(0.7, -0.4);
  Matrix lhs = kron(x1 + s * x2, y).mat;
  Matrix rhs = kron(x1, y).mat + s * kron(x2, y).mat;
  CHECK(rel_diff(lhs, rhs) < 1e-15);
}

TEST_CASE("embed identity and homomorphism") {
  SpaceLayout target({{"a", 2}, {"q", 3}});
  OperatorMatrix i2 = OperatorMatrix::identity(SpaceLayout({{"a", 2}}));
  CHECK(rel_diff(embed(i2, target).mat, Matrix(Matrix::Identity(6, 6))) == 0.0);

  std::mt19937_64 rng(21);
  SpaceLayout la({{"a", 2}});
  for (int trial = 0; trial < 20; ++trial) {
    OperatorMatrix x(la, random_matrix(2, rng));
    OperatorMatrix y(la, random_matrix(2, rng));
    Matrix lhs = embed(x * y, target).mat;
    Matrix rhs = (embed(x, target) * embed(y, target)).mat;
    CHECK(rel_diff(lhs, rhs) < 1e-12);
  }

  CHECK_THROWS_AS(embed(OperatorMatrix::identity(SpaceLayout({{"z", 2}})), target),
                  ConfigError);
  CHECK_THROWS_AS(embed(OperatorMatrix::identity(SpaceLayout({{"a", 3}})), target),
                  ConfigError);
}

TEST_CASE("embedded swaps do not commute") {
  SpaceLayout full({{"a", 2}, {"b", 2}, {"c", 2}});
  OperatorMatrix pab = embed(permutation_op(2, "a", "b"), full);
  OperatorMatrix pbc = embed(permutation_op(2, "b", "c"), full);
  // oracle: explicit permutation action on index triples
  Matrix oab = swap_oracle({2, 2, 2}, 0, 1);
  Matrix obc = swap_oracle({2, 2, 2}, 1, 2);
  CHECK(rel_diff(pab.mat, oab) == 0.0);
  CHECK(rel_diff(pbc.mat, obc) == 0.0);
  Matrix fwd = (pab * pbc).mat;
  Matrix rev = (pbc * pab).mat;
  CHECK(rel_diff(fwd, Matrix(oab * obc)) == 0.0);
  CHECK(rel_diff(fwd, rev) > 0.5);  // non-commuting swaps
}

TEST_CASE("basis reordering round trip") {
  std::mt19937_64 rng(5);
  SpaceLayout l1({{"a", 2}, {"b", 3}, {"c", 2}});
  SpaceLayout l2({{"c", 2}, {"a", 2}, {"b", 3}});
  OperatorMatrix x(l1, random_matrix(12, rng));
  OperatorMatrix back = embed(embed(x, l2), l1);
  CHECK(rel_diff(back.mat, x.mat) == 0.0);
}

TEST_CASE("partial trace") {
  std::mt19937_64 rng(11);
  Matrix m = random_matrix(3, rng);
  OperatorMatrix im = kron(OperatorMatrix::identity(SpaceLayout({{"a", 2}})),
                           OperatorMatrix(SpaceLayout({{"q", 3}}), m));
  OperatorMatrix tr_first = partial_trace(im, "a");
  CHECK(rel_diff(tr_first.mat, Matrix(2.0 * m)) < 1e-15);

  // tracing either leg of the permutation operator gives the identity
  OperatorMatrix p = permutation_op(2, "a", "b");
  CHECK(rel_diff(partial_trace(p, "a").mat, Matrix(Matrix::Identity(2, 2))) == 0.0);
  CHECK(rel_diff(partial_trace(p, "b").mat, Matrix(Matrix::Identity(2, 2))) == 0.0);

  // trace consistency on random operators
  SpaceLayout l({{"a", 2}, {"b", 3}});
  OperatorMatrix x(l, random_matrix(6, rng));
  CHECK(std::abs(trace(partial_trace(x, "a")) - trace(x)) < 1e-13);
  CHECK(std::abs(trace(partial_trace(x, "b")) - trace(x)) < 1e-13);

  // linearity and the product rule tr_A(A (x) B) = tr(A) B
  OperatorMatrix a(SpaceLayout({{"a", 2}}), random_matrix(2, rng));
  OperatorMatrix b(SpaceLayout({{"b", 3}}), random_matrix(3, rng));
  OperatorMatrix ab = kron(a, b);
  CHECK(rel_diff(partial_trace(ab, "a").mat, Matrix(trace(a) * b.mat)) < 1e-12);
  OperatorMatrix y(l, random_matrix(6, rng));
  cplx s(0.3, 1.1);
  CHECK(rel_diff(partial_trace(x + s * y, "b").mat,
                 Matrix(partial_trace(x, "b").mat + s * partial_trace(y, "b").mat)) < 1e-13);

  CHECK_THROWS_AS(partial_trace(x, "nope"), ConfigError);
}

TEST_CASE("permutation operator") {
  OperatorMatrix p2 = permutation_op(2);
  Matrix expected(4, 4);
  expected << 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1;
  CHECK(rel_diff(p2.mat, expected) == 0.0);

  OperatorMatrix p3 = permutation_op(3);
  CHECK(rel_diff((p3 * p3).mat, Matrix(Matrix::Identity(9, 9))) == 0.0);

  CHECK(std::abs(trace(permutation_op(4)) - cplx(4.0)) == 0.0);

  // P(x (x) y) = y (x) x on random product vectors
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (int trial = 0; trial < 5; ++trial) {
    Vector x(3), y(3);
    for (int i = 0; i < 3; ++i) {
      x(i) = cplx(dist(rng), dist(rng));
      y(i) = cplx(dist(rng), dist(rng));
    }
    Vector xy(9), yx(9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        xy(i * 3 + j) = x(i) * y(j);
        yx(i * 3 + j) = y(i) * x(j);
      }
    CHECK(rel_diff(Vector(p3.mat * xy), yx) < 1e-15);
  }

  CHECK_THROWS_AS(permutation_op(1), ConfigError);
}

TEST_CASE("space block extraction") {
  // blocks of P are the unit matrices: <i|P|j> = E_ji
  OperatorMatrix p = permutation_op(3, "a", "b");
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      OperatorMatrix blk = space_block(p, "a", i, j);
      CHECK(rel_diff(blk.mat, unit_matrix(3, j, i)) == 0.0);
    }
  CHECK_THROWS_AS(space_block(p, "a", 0, 1), ConfigError);
  CHECK_THROWS_AS(space_block(p, "z", 1, 1), ConfigError);
}

TEST_CASE("partial transpose") {
  std::mt19937_64 rng(13);
  SpaceLayout l({{"a", 2}, {"b", 3}});
  OperatorMatrix x(l, random_matrix(6, rng));
  OperatorMatrix t = partial_transpose(x, "a");
  // involution, and double transpose over both spaces = full transpose
  CHECK(rel_diff(partial_transpose(t, "a").mat, x.mat) == 0.0);
  OperatorMatrix tt = partial_transpose(t, "b");
  CHECK(rel_diff(tt.mat, Matrix(x.mat.transpose())) == 0.0);
}

TEST_CASE("relabeling") {
  OperatorMatrix p = permutation_op(2, "a", "b");
  OperatorMatrix q = relabeled(p, "a", "x");
  CHECK(q.layout.has("x"));
  CHECK(!q.layout.has("a"));
  CHECK(rel_diff(p.mat, q.mat) == 0.0);
}
