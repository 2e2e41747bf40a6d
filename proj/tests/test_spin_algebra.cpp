#include "spinvar/errors.hpp"
#include "spinvar/spin_algebra.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace spinvar;

namespace {

const Complex kI(0.0, 1.0);

// Independent Kronecker product for cross-checking embed.
Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix random_local_hermitian(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix x(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) x(i, j) = Complex(normal(rng), normal(rng));
  }
  return 0.5 * (x + x.adjoint());
}

}  // namespace

TEST_CASE("spin-1/2 matrices are the Pauli matrices over two") {
  const LocalSpin s = local_spin(0.5);
  CHECK(s.dim() == 2);
  CHECK(s.sz(0, 0) == Complex(0.5));
  CHECK(s.sz(1, 1) == Complex(-0.5));
  CHECK(s.sx(0, 1) == Complex(0.5));
  CHECK(s.sx(1, 0) == Complex(0.5));
  CHECK(s.sx(0, 0) == Complex(0.0));
  CHECK(max_abs(commutator(s.sx, s.sy) - kI * s.sz) == 0.0);
}

TEST_CASE("spin-1 S^z is diag(1, 0, -1)") {
  const LocalSpin s = local_spin(1.0);
  CHECK(s.dim() == 3);
  CHECK(s.sz.real().diagonal().isApprox(Eigen::Vector3d(1.0, 0.0, -1.0)));
  CHECK(max_abs(s.sz - Matrix(s.sz.diagonal().asDiagonal())) == 0.0);
}

TEST_CASE("spin algebra identities hold for S up to 2") {
  for (double spin : {0.5, 1.0, 1.5, 2.0}) {
    CAPTURE(spin);
    const LocalSpin s = local_spin(spin);
    for (const Matrix* m : {&s.sx, &s.sy, &s.sz}) CHECK(max_abs(*m - m->adjoint()) <= 1e-14);
    CHECK(max_abs(commutator(s.sx, s.sy) - kI * s.sz) <= 1e-12);
    CHECK(max_abs(commutator(s.sy, s.sz) - kI * s.sx) <= 1e-12);
    CHECK(max_abs(commutator(s.sz, s.sx) - kI * s.sy) <= 1e-12);
    const Matrix casimir = s.sx * s.sx + s.sy * s.sy + s.sz * s.sz;
    const Matrix expected = spin * (spin + 1.0) * Matrix::Identity(s.dim(), s.dim());
    CHECK(max_abs(casimir - expected) <= 1e-12);
  }
}

TEST_CASE("non-half-integer spin is rejected") {
  CHECK_THROWS_AS(local_spin(0.3), InvalidArgument);
  CHECK_THROWS_AS(local_spin(0.0), InvalidArgument);
  CHECK_THROWS_AS(local_spin(-0.5), InvalidArgument);
  CHECK_THROWS_AS(SpinMagnitude::from_twice(0), InvalidArgument);
}

TEST_CASE("embed S^z at site 0 of two spins") {
  const HilbertSpace space(2, SpinMagnitude::from_twice(1));
  const HermitianOperator op = embed(space, 0, local_spin(0.5).sz);
  CHECK(op.is_diagonal());
  CHECK(op.diagonal_values().isApprox(Eigen::Vector4d(0.5, 0.5, -0.5, -0.5)));
}

TEST_CASE("embed identity gives the identity") {
  const HilbertSpace space(3, SpinMagnitude::from_twice(2));
  for (int site = 0; site < 3; ++site) {
    const HermitianOperator op = embed(space, site, Matrix::Identity(3, 3));
    CHECK(max_abs(op.matrix() - Matrix::Identity(27, 27)) == 0.0);
  }
}

TEST_CASE("embed at the last of three sites matches the explicit Kronecker product") {
  const HilbertSpace space(3, SpinMagnitude::from_twice(1));
  const LocalSpin s = local_spin(0.5);
  const Matrix id = Matrix::Identity(2, 2);
  const Matrix reference = kron(kron(id, id), s.sz);
  const HermitianOperator op = embed(space, 2, s.sz);
  CHECK(max_abs(op.matrix() - reference) == 0.0);
  CHECK(std::abs(op.matrix().trace()) == 0.0);
  CHECK(operator_norm(op) == doctest::Approx(0.5).epsilon(1e-15));

  const Matrix middle = kron(kron(id, s.sx), id);
  CHECK(max_abs(embed(space, 1, s.sx).matrix() - middle) == 0.0);
}

TEST_CASE("embed is linear and operators on different sites commute") {
  std::mt19937_64 rng(7);
  const HilbertSpace space(3, SpinMagnitude::from_twice(2));
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix m = random_local_hermitian(3, rng);
    const Matrix n = random_local_hermitian(3, rng);
    const double a = 0.7 * trial - 1.0;
    const double b = 1.3;
    const Matrix lhs = embed(space, 1, a * m + b * n).matrix();
    const Matrix rhs = a * embed(space, 1, m).matrix() + b * embed(space, 1, n).matrix();
    CHECK(max_abs(lhs - rhs) <= 1e-13);
    const HermitianOperator em = embed(space, trial % 3, m);
    const HermitianOperator en = embed(space, (trial + 1) % 3, n);
    CHECK(max_abs(commutator(em, en)) <= 1e-12);
  }
}

TEST_CASE("operator norm is unchanged by tensoring with the identity") {
  std::mt19937_64 rng(11);
  const Matrix a = random_local_hermitian(2, rng);
  const HilbertSpace space(4, SpinMagnitude::from_twice(1));
  CHECK(operator_norm(embed(space, 2, a)) == doctest::Approx(operator_norm(HermitianOperator(a))).epsilon(1e-12));
  CHECK(operator_norm(HermitianOperator::identity(4)) == 1.0);
}

TEST_CASE("embed_product of two sites equals the product of single embeddings") {
  const HilbertSpace space(3, SpinMagnitude::from_twice(1));
  const LocalSpin s = local_spin(0.5);
  const Matrix expected = embed(space, 0, s.sy).matrix() * embed(space, 2, s.sy).matrix();
  CHECK(max_abs(embed_product(space, {{0, s.sy}, {2, s.sy}}).matrix() - expected) <= 1e-15);
  CHECK_THROWS_AS(embed_product(space, {{1, s.sz}, {1, s.sz}}), InvalidArgument);
  CHECK_THROWS_AS(embed(space, 3, s.sz), InvalidArgument);
  CHECK_THROWS_AS(embed(space, 0, Matrix::Identity(3, 3)), InvalidArgument);
}

TEST_CASE("Hilbert space cap is enforced") {
  CHECK_NOTHROW(HilbertSpace(12, SpinMagnitude::from_twice(1)));
  CHECK_THROWS_AS(HilbertSpace(13, SpinMagnitude::from_twice(1)), CapacityError);
  CHECK_THROWS_AS(HilbertSpace(4, SpinMagnitude::from_twice(2), 80), CapacityError);
  CHECK(HilbertSpace(4, SpinMagnitude::from_twice(2), 81).total_dim() == 81);
}

TEST_CASE("Hermitian operator validation and commutator errors") {
  Matrix m(2, 2);
  m << 1.0, Complex(0.0, 1.0), Complex(0.0, 1.0), 2.0;
  CHECK_THROWS_AS(HermitianOperator{m}, InvalidArgument);
  CHECK_THROWS_AS(HermitianOperator(Matrix::Zero(2, 3)), InvalidArgument);
  CHECK_THROWS_AS(commutator(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), InvalidArgument);
  const HermitianOperator a = HermitianOperator::diagonal(Eigen::Vector3d(1.0, -2.0, 0.5));
  CHECK(max_abs(commutator(a, a)) == 0.0);
  CHECK(operator_norm(a) == 2.0);
}
