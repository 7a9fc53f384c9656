#pragma once

// Finite dimensional *-algebra core: n x n complex matrices under the
// normalized trace, Hermitian functional calculus and superoperators.
//
// Superoperators act on a block-diagonal *-subalgebra of C^{n x n}
// described by a BlockLayout. The full matrix algebra is the single-block
// layout. Elements are vectorized by column-stacking each diagonal block and
// concatenating the blocks in order, so for the full layout vec() is the
// usual column-major stacking and the sandwich x h y has the matrix form
// kron(transpose(y), x).

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dyson {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands of incompatible sizes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on the input values does not hold.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Iterative or spectral computation failed to reach its contract.
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kHermitianTolerance = 1e-8;
inline constexpr double kSignTolerance = 1e-10;

Matrix identity(int n);

cplx normalized_trace(const Matrix& x);
/// <x, y> = <x^* y>, conjugate-linear in the first slot.
cplx inner_product(const Matrix& x, const Matrix& y);
/// <x, x>^{1/2}
double norm2(const Matrix& x);
double operator_norm(const Matrix& x);

bool is_hermitian(const Matrix& x, double tol);
bool is_psd(const Matrix& x, double tol);

Matrix real_part(const Matrix& x);
Matrix imag_part(const Matrix& x);

/// Returns (x + x^*)/2 when ||x - x^*|| <= 1e-8 ||x||, throws DomainError otherwise.
Matrix hermitize(const Matrix& x);

struct HermitianEigen {
  RVector values;  // ascending
  Matrix vectors;  // columns
};

HermitianEigen hermitian_eigen(const Matrix& x);

/// U f(L) U^* for x = U L U^*. f may throw DomainError where it is undefined.
Matrix hermitian_function(const Matrix& x, const std::function<double(double)>& f);

Matrix matrix_sqrt(const Matrix& x);
Matrix matrix_abs(const Matrix& x);
/// Throws DomainError if an eigenvalue has modulus below 1e-10.
Matrix matrix_sign(const Matrix& x);
/// Spectral projection onto (-inf, 0).
Matrix negative_indicator(const Matrix& x);
/// x^p for positive definite x.
Matrix matrix_power(const Matrix& x, double p);

class BlockLayout {
 public:
  explicit BlockLayout(std::vector<int> block_sizes);

  static BlockLayout full(int n);
  static BlockLayout diagonal(int n);
  static BlockLayout uniform(int blocks, int block_size);

  int matrix_dim() const { return n_; }
  int vector_dim() const { return d_; }
  int block_count() const { return static_cast<int>(sizes_.size()); }
  int block_size(int k) const { return sizes_[k]; }
  int block_offset(int k) const { return offsets_[k]; }
  bool is_full() const { return sizes_.size() == 1; }
  const std::vector<int>& block_sizes() const { return sizes_; }

  CVector vec(const Matrix& x) const;
  Matrix unvec(const CVector& v) const;

  bool contains(const Matrix& x, double tol) const;
  Matrix project(const Matrix& x) const;

  Matrix inverse(const Matrix& x) const;
  /// x y for x, y in the layout, computed block by block.
  Matrix multiply(const Matrix& x, const Matrix& y) const;
  /// Smallest eigenvalue of the Hermitian part, computed block by block.
  double min_eigenvalue(const Matrix& x) const;
  double max_eigenvalue(const Matrix& x) const;
  Matrix apply_hermitian(const Matrix& x, const std::function<double(double)>& f) const;

  bool operator==(const BlockLayout& other) const { return sizes_ == other.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int n_ = 0;
  int d_ = 0;
};

class SuperOperator {
 public:
  SuperOperator(BlockLayout layout, Eigen::MatrixXcd matrix_form);

  static SuperOperator identity(const BlockLayout& layout);
  static SuperOperator zero(const BlockLayout& layout);
  /// Assembles the matrix form of a linear map column by column.
  static SuperOperator from_map(const BlockLayout& layout,
                                const std::function<Matrix(const Matrix&)>& map);

  const BlockLayout& layout() const { return layout_; }
  const Eigen::MatrixXcd& matrix_form() const { return mat_; }
  int dim() const { return static_cast<int>(mat_.rows()); }

  Matrix apply(const Matrix& x) const;
  Matrix operator()(const Matrix& x) const { return apply(x); }

  /// Adjoint with respect to the normalized trace inner product.
  SuperOperator adjoint() const;
  SuperOperator inverse() const;
  double norm() const;

  SuperOperator operator*(const SuperOperator& rhs) const;
  SuperOperator operator+(const SuperOperator& rhs) const;
  SuperOperator operator-(const SuperOperator& rhs) const;
  SuperOperator operator*(cplx s) const;

 private:
  BlockLayout layout_;
  Eigen::MatrixXcd mat_;
};

/// C_{x,y}[h] = x h y on the given layout. x and y must lie in the layout.
SuperOperator sandwich(const Matrix& x, const Matrix& y, const BlockLayout& layout);
SuperOperator sandwich(const Matrix& x, const Matrix& y);

struct EigenData {
  CVector values;
  Eigen::MatrixXcd right;  // columns are right eigenvectors (vectorized)
  Eigen::MatrixXcd left;   // columns satisfy left^* right = I
  double residual = 0.0;
};

EigenData superop_eigendata(const SuperOperator& op);

}  // namespace dyson
