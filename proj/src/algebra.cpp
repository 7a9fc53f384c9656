#include "dysonlab/algebra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace dyson {

namespace {

void require_square(const Matrix& x, const char* what) {
  if (x.rows() != x.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << x.rows() << "x" << x.cols();
    throw DimensionError(os.str());
  }
}

void require_same(const Matrix& x, const Matrix& y, const char* what) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    std::ostringstream os;
    os << what << ": dimension mismatch " << x.rows() << "x" << x.cols() << " vs " << y.rows()
       << "x" << y.cols();
    throw DimensionError(os.str());
  }
}

}  // namespace

Matrix identity(int n) { return Matrix::Identity(n, n); }

cplx normalized_trace(const Matrix& x) {
  require_square(x, "normalized_trace");
  if (x.rows() == 0) throw DimensionError("normalized_trace: empty matrix");
  return x.trace() / static_cast<double>(x.rows());
}

cplx inner_product(const Matrix& x, const Matrix& y) {
  require_same(x, y, "inner_product");
  require_square(x, "inner_product");
  // Tr(x^* y) = sum conj(x_ij) y_ij
  return x.conjugate().cwiseProduct(y).sum() / static_cast<double>(x.rows());
}

double norm2(const Matrix& x) {
  require_square(x, "norm2");
  return x.norm() / std::sqrt(static_cast<double>(x.rows()));
}

double operator_norm(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(x);
  return svd.singularValues()(0);
}

bool is_hermitian(const Matrix& x, double tol) {
  if (x.rows() != x.cols()) return false;
  return (x - x.adjoint()).norm() <= tol * std::max(1.0, x.norm());
}

bool is_psd(const Matrix& x, double tol) {
  if (!is_hermitian(x, tol)) return false;
  Matrix h = (x + x.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

Matrix real_part(const Matrix& x) { return (x + x.adjoint()) / 2.0; }

Matrix imag_part(const Matrix& x) { return (x - x.adjoint()) / cplx(0.0, 2.0); }

Matrix hermitize(const Matrix& x) {
  require_square(x, "hermitize");
  if (!x.allFinite()) throw DomainError("hermitize: non-finite entries");
  double defect = (x - x.adjoint()).norm();
  if (defect > kHermitianTolerance * x.norm()) {
    std::ostringstream os;
    os << "matrix is not Hermitian: ||x - x*|| = " << defect << ", ||x|| = " << x.norm();
    throw DomainError(os.str());
  }
  return (x + x.adjoint()) / 2.0;
}

HermitianEigen hermitian_eigen(const Matrix& x) {
  Matrix h = hermitize(x);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

Matrix hermitian_function(const Matrix& x, const std::function<double(double)>& f) {
  HermitianEigen e = hermitian_eigen(x);
  RVector fv(e.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(e.values(i));
  return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

Matrix matrix_sqrt(const Matrix& x) {
  HermitianEigen e = hermitian_eigen(x);
  double scale = std::max(1.0, e.values.cwiseAbs().maxCoeff());
  RVector fv(e.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) {
    double v = e.values(i);
    if (v < -1e-12 * scale) throw DomainError("matrix_sqrt: negative eigenvalue");
    fv(i) = std::sqrt(std::max(v, 0.0));
  }
  return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

Matrix matrix_abs(const Matrix& x) {
  return hermitian_function(x, [](double t) { return std::abs(t); });
}

Matrix matrix_sign(const Matrix& x) {
  return hermitian_function(x, [](double t) {
    if (std::abs(t) < kSignTolerance) throw DomainError("sign: eigenvalue too close to zero");
    return t > 0 ? 1.0 : -1.0;
  });
}

Matrix negative_indicator(const Matrix& x) {
  return hermitian_function(x, [](double t) { return t < 0 ? 1.0 : 0.0; });
}

Matrix matrix_power(const Matrix& x, double p) {
  return hermitian_function(x, [p](double t) {
    if (t <= 0) throw DomainError("matrix_power: matrix is not positive definite");
    return std::pow(t, p);
  });
}

// ---------------------------------------------------------------------------

BlockLayout::BlockLayout(std::vector<int> block_sizes) : sizes_(std::move(block_sizes)) {
  if (sizes_.empty()) throw DimensionError("BlockLayout: no blocks");
  offsets_.reserve(sizes_.size());
  for (int b : sizes_) {
    if (b <= 0) throw DimensionError("BlockLayout: block size must be positive");
    offsets_.push_back(n_);
    n_ += b;
    d_ += b * b;
  }
}

BlockLayout BlockLayout::full(int n) { return BlockLayout({n}); }

BlockLayout BlockLayout::diagonal(int n) { return BlockLayout(std::vector<int>(n, 1)); }

BlockLayout BlockLayout::uniform(int blocks, int block_size) {
  return BlockLayout(std::vector<int>(blocks, block_size));
}

CVector BlockLayout::vec(const Matrix& x) const {
  if (x.rows() != n_ || x.cols() != n_) throw DimensionError("BlockLayout::vec: size mismatch");
  CVector v(d_);
  Eigen::Index pos = 0;
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    int o = offsets_[k], b = sizes_[k];
    for (int c = 0; c < b; ++c)
      for (int r = 0; r < b; ++r) v(pos++) = x(o + r, o + c);
  }
  return v;
}

Matrix BlockLayout::unvec(const CVector& v) const {
  if (v.size() != d_) throw DimensionError("BlockLayout::unvec: size mismatch");
  Matrix x = Matrix::Zero(n_, n_);
  Eigen::Index pos = 0;
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    int o = offsets_[k], b = sizes_[k];
    for (int c = 0; c < b; ++c)
      for (int r = 0; r < b; ++r) x(o + r, o + c) = v(pos++);
  }
  return x;
}

Matrix BlockLayout::project(const Matrix& x) const { return unvec(vec(x)); }

bool BlockLayout::contains(const Matrix& x, double tol) const {
  if (x.rows() != n_ || x.cols() != n_) return false;
  return (x - project(x)).norm() <= tol * std::max(1.0, x.norm());
}

Matrix BlockLayout::inverse(const Matrix& x) const {
  if (x.rows() != n_ || x.cols() != n_) throw DimensionError("BlockLayout::inverse: size mismatch");
  Matrix out = Matrix::Zero(n_, n_);
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    int o = offsets_[k], b = sizes_[k];
    if (b == 1) {
      if (x(o, o) == cplx{}) throw NumericalError("BlockLayout::inverse: singular block");
      out(o, o) = 1.0 / x(o, o);
      continue;
    }
    Eigen::PartialPivLU<Matrix> lu(x.block(o, o, b, b));
    out.block(o, o, b, b) = lu.inverse();
  }
  if (!out.allFinite()) throw NumericalError("BlockLayout::inverse: singular block");
  return out;
}

Matrix BlockLayout::multiply(const Matrix& x, const Matrix& y) const {
  if (is_full()) return x * y;
  Matrix out = Matrix::Zero(n_, n_);
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    int o = offsets_[k], b = sizes_[k];
    if (b == 1)
      out(o, o) = x(o, o) * y(o, o);
    else
      out.block(o, o, b, b).noalias() = x.block(o, o, b, b) * y.block(o, o, b, b);
  }
  return out;
}

double BlockLayout::min_eigenvalue(const Matrix& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    int o = offsets_[k], b = sizes_[k];
    Matrix blk = x.block(o, o, b, b);
    blk = (blk + blk.adjoint()) / 2.0;
    if (b == 1) {
      best = std::min(best, blk(0, 0).real());
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(blk, Eigen::EigenvaluesOnly);
    best = std::min(best, es.eigenvalues()(0));
  }
  return best;
}

double BlockLayout::max_eigenvalue(const Matrix& x) const {
  return -min_eigenvalue(-x);
}

Matrix BlockLayout::apply_hermitian(const Matrix& x, const std::function<double(double)>& f) const {
  if (x.rows() != n_ || x.cols() != n_) throw DimensionError("apply_hermitian: size mismatch");
  Matrix out = Matrix::Zero(n_, n_);
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    int o = offsets_[k], b = sizes_[k];
    out.block(o, o, b, b) = hermitian_function(x.block(o, o, b, b), f);
  }
  return out;
}

// ---------------------------------------------------------------------------

SuperOperator::SuperOperator(BlockLayout layout, Eigen::MatrixXcd matrix_form)
    : layout_(std::move(layout)), mat_(std::move(matrix_form)) {
  if (mat_.rows() != layout_.vector_dim() || mat_.cols() != layout_.vector_dim())
    throw DimensionError("SuperOperator: matrix form does not match layout");
}

SuperOperator SuperOperator::identity(const BlockLayout& layout) {
  int d = layout.vector_dim();
  return SuperOperator(layout, Eigen::MatrixXcd::Identity(d, d));
}

SuperOperator SuperOperator::zero(const BlockLayout& layout) {
  int d = layout.vector_dim();
  return SuperOperator(layout, Eigen::MatrixXcd::Zero(d, d));
}

SuperOperator SuperOperator::from_map(const BlockLayout& layout,
                                      const std::function<Matrix(const Matrix&)>& map) {
  int d = layout.vector_dim();
  Eigen::MatrixXcd mat(d, d);
  CVector e = CVector::Zero(d);
  for (int j = 0; j < d; ++j) {
    e(j) = 1.0;
    mat.col(j) = layout.vec(map(layout.unvec(e)));
    e(j) = 0.0;
  }
  return SuperOperator(layout, std::move(mat));
}

Matrix SuperOperator::apply(const Matrix& x) const { return layout_.unvec(mat_ * layout_.vec(x)); }

SuperOperator SuperOperator::adjoint() const { return SuperOperator(layout_, mat_.adjoint()); }

SuperOperator SuperOperator::inverse() const {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(mat_);
  Eigen::MatrixXcd inv = lu.inverse();
  if (!inv.allFinite()) throw NumericalError("SuperOperator::inverse: singular operator");
  return SuperOperator(layout_, std::move(inv));
}

double SuperOperator::norm() const {
  // Block vectorization preserves the Hilbert-Schmidt norm up to the common 1/n factor.
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mat_);
  return svd.singularValues()(0);
}

SuperOperator SuperOperator::operator*(const SuperOperator& rhs) const {
  if (!(layout_ == rhs.layout_)) throw DimensionError("SuperOperator: layout mismatch");
  return SuperOperator(layout_, mat_ * rhs.mat_);
}

SuperOperator SuperOperator::operator+(const SuperOperator& rhs) const {
  if (!(layout_ == rhs.layout_)) throw DimensionError("SuperOperator: layout mismatch");
  return SuperOperator(layout_, mat_ + rhs.mat_);
}

SuperOperator SuperOperator::operator-(const SuperOperator& rhs) const {
  if (!(layout_ == rhs.layout_)) throw DimensionError("SuperOperator: layout mismatch");
  return SuperOperator(layout_, mat_ - rhs.mat_);
}

SuperOperator SuperOperator::operator*(cplx s) const { return SuperOperator(layout_, mat_ * s); }

SuperOperator sandwich(const Matrix& x, const Matrix& y, const BlockLayout& layout) {
  const int n = layout.matrix_dim();
  if (x.rows() != n || x.cols() != n || y.rows() != n || y.cols() != n)
    throw DimensionError("sandwich: size mismatch");
  const int d = layout.vector_dim();
  Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(d, d);
  int pos = 0;
  for (int k = 0; k < layout.block_count(); ++k) {
    const int o = layout.block_offset(k), b = layout.block_size(k);
    // kron(y^T, x) on the block: entry ((c,r),(c',r')) = y(c',c) x(r,r')
    for (int c = 0; c < b; ++c)
      for (int cp = 0; cp < b; ++cp) {
        const cplx ycc = y(o + cp, o + c);
        if (ycc == cplx{}) continue;
        mat.block(pos + c * b, pos + cp * b, b, b) = ycc * x.block(o, o, b, b);
      }
    pos += b * b;
  }
  return SuperOperator(layout, std::move(mat));
}

SuperOperator sandwich(const Matrix& x, const Matrix& y) {
  return sandwich(x, y, BlockLayout::full(static_cast<int>(x.rows())));
}

EigenData superop_eigendata(const SuperOperator& op) {
  const Eigen::MatrixXcd& t = op.matrix_form();
  if (!t.allFinite()) throw NumericalError("superop_eigendata: non-finite entries");
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(t);
  if (es.info() != Eigen::Success) throw NumericalError("superop_eigendata: eigensolver failed");
  EigenData out;
  out.values = es.eigenvalues();
  out.right = es.eigenvectors();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(out.right);
  out.left = lu.inverse().adjoint();
  double scale = std::max(1.0, t.norm());
  out.residual = (t * out.right - out.right * out.values.asDiagonal()).norm() / scale;
  if (!out.left.allFinite() || out.residual > 1e-8)
    throw NumericalError("superop_eigendata: eigenvector reconstruction failed");
  return out;
}

}  // namespace dyson
