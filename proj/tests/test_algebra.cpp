#include "dysonlab/algebra.hpp"

#include <doctest.h>

#include <random>

using namespace dyson;

namespace {

Matrix random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = cplx(g(rng), g(rng));
  return m;
}

Matrix random_hermitian(int n, std::mt19937_64& rng) {
  Matrix m = random_matrix(n, rng);
  return (m + m.adjoint()) / 2.0;
}

}  // namespace

TEST_SUITE("algebra") {
  TEST_CASE("normalized trace and inner product") {
    Matrix x = Matrix::Identity(3, 3) * cplx(2.0, 1.0);
    CHECK(std::abs(normalized_trace(x) - cplx(2.0, 1.0)) < 1e-15);
    std::mt19937_64 rng(3);
    Matrix a = random_matrix(4, rng), b = random_matrix(4, rng);
    const cplx c(0.3, -1.2);
    CHECK(std::abs(inner_product(c * a, b) - std::conj(c) * inner_product(a, b)) < 1e-12);
    CHECK(std::abs(inner_product(a, a).real() - norm2(a) * norm2(a)) < 1e-12);
    CHECK(norm2(Matrix::Identity(5, 5)) == doctest::Approx(1.0));
  }

  TEST_CASE("functional calculus") {
    std::mt19937_64 rng(4);
    Matrix h = random_hermitian(5, rng);
    Matrix p = h * h + Matrix::Identity(5, 5);
    Matrix r = matrix_sqrt(p);
    CHECK((r * r - p).norm() < 1e-11);
    CHECK((matrix_power(p, -0.5) * r - Matrix::Identity(5, 5)).norm() < 1e-11);
    Matrix s = matrix_sign(h);
    CHECK((s * s - Matrix::Identity(5, 5)).norm() < 1e-10);
    CHECK((matrix_abs(h) - s * h).norm() < 1e-10);
    CHECK_THROWS_AS(matrix_sign(Matrix::Zero(2, 2)), DomainError);
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = -1.0, d(1, 1) = 2.0, d(2, 2) = -3.0;
    CHECK(normalized_trace(negative_indicator(d)).real() == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("hermitize rejects non-Hermitian input") {
    Matrix x = Matrix::Zero(2, 2);
    x(0, 1) = 1.0;
    CHECK_THROWS_AS(hermitize(x), DomainError);
    CHECK_FALSE(is_hermitian(x, 1e-8));
    CHECK(is_psd(Matrix::Identity(2, 2), 0.0));
  }

  TEST_CASE("block layout vec round trip and blockwise products") {
    std::mt19937_64 rng(5);
    BlockLayout L({2, 3, 1});
    CHECK(L.matrix_dim() == 6);
    CHECK(L.vector_dim() == 4 + 9 + 1);
    for (int trial = 0; trial < 20; ++trial) {
      Matrix x = L.project(random_matrix(6, rng));
      Matrix y = L.project(random_matrix(6, rng));
      CHECK(L.contains(x, 0.0));
      CHECK((L.unvec(L.vec(x)) - x).norm() == 0.0);
      CHECK((L.multiply(x, y) - x * y).norm() < 1e-12);
      Matrix xi = L.inverse(x);
      CHECK((xi * x - Matrix::Identity(6, 6)).norm() < 1e-8 * (1 + xi.norm() * x.norm()));
      // inner product in vec coordinates
      CHECK(std::abs(L.vec(x).dot(L.vec(y)) / 6.0 - inner_product(x, y)) < 1e-12);
    }
    Matrix full = random_matrix(6, rng);
    CHECK_FALSE(L.contains(full, 1e-12));
    CHECK(BlockLayout::uniform(3, 2) == BlockLayout({2, 2, 2}));
    CHECK(BlockLayout::diagonal(4).block_count() == 4);
  }

  TEST_CASE("sandwich operators and adjoints") {
    std::mt19937_64 rng(6);
    for (const BlockLayout& L : {BlockLayout::full(4), BlockLayout({1, 3})}) {
      Matrix x = L.project(random_matrix(4, rng)), y = L.project(random_matrix(4, rng));
      SuperOperator C = sandwich(x, y, L);
      Matrix h = L.project(random_matrix(4, rng)), g = L.project(random_matrix(4, rng));
      CHECK((C(h) - x * h * y).norm() < 1e-12);
      // <g, C h> = <C^* g, h> with C^* = C_{x^*, y^*}
      CHECK(std::abs(inner_product(g, C(h)) - inner_product(C.adjoint()(g), h)) < 1e-12);
      CHECK((C.adjoint().matrix_form() - sandwich(x.adjoint(), y.adjoint(), L).matrix_form()).norm() < 1e-12);
      SuperOperator Ci = C.inverse();
      CHECK(((Ci * C).matrix_form() - SuperOperator::identity(L).matrix_form()).norm() < 1e-8);
    }
  }

  TEST_CASE("superoperator eigendata is biorthogonal") {
    std::mt19937_64 rng(7);
    BlockLayout L = BlockLayout::full(3);
    SuperOperator T(L, random_matrix(9, rng));
    EigenData ed = superop_eigendata(T);
    CHECK(ed.residual < 1e-8);
    const Eigen::MatrixXcd id = ed.left.adjoint() * ed.right;
    CHECK((id - Eigen::MatrixXcd::Identity(9, 9)).norm() < 1e-8);
    for (int k = 0; k < 9; ++k)
      CHECK((T.matrix_form() * ed.right.col(k) - ed.values(k) * ed.right.col(k)).norm() < 1e-9);
  }

  TEST_CASE("dimension mismatches throw") {
    SuperOperator a = SuperOperator::identity(BlockLayout::full(2));
    SuperOperator b = SuperOperator::identity(BlockLayout::full(3));
    CHECK_THROWS_AS(a * b, DimensionError);
  }
}
