#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ptdimer {

using complex = std::complex<double>;

inline constexpr complex kI{0.0, 1.0};

/// Raised when a factorization meets a pivot that is zero to working precision.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense complex vector. Sized for kets (dim <= 8) and vectorized density
/// matrices (dim <= 64).
class ComplexVector {
 public:
  ComplexVector() = default;
  explicit ComplexVector(std::size_t dim, complex fill = {}) : data_(dim, fill) {}
  ComplexVector(std::initializer_list<complex> values) : data_(values) {}
  explicit ComplexVector(std::vector<complex> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  complex& operator[](std::size_t i) { return data_[i]; }
  const complex& operator[](std::size_t i) const { return data_[i]; }

  std::span<complex> values() { return data_; }
  std::span<const complex> values() const { return data_; }

  double norm() const;
  complex dot(const ComplexVector& other) const;  // <this|other>, conjugating this

  ComplexVector& operator+=(const ComplexVector& rhs);
  ComplexVector& operator-=(const ComplexVector& rhs);
  ComplexVector& operator*=(complex s);

 private:
  std::vector<complex> data_;
};

ComplexVector operator+(ComplexVector lhs, const ComplexVector& rhs);
ComplexVector operator-(ComplexVector lhs, const ComplexVector& rhs);
ComplexVector operator*(complex s, ComplexVector v);

/// Dense row-major complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols, complex fill = {})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  /// Row-major nested initializer: {{a, b}, {c, d}}.
  ComplexMatrix(std::initializer_list<std::initializer_list<complex>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static ComplexMatrix diagonal(std::span<const complex> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool is_square() const { return rows_ == cols_; }

  complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<complex> values() { return data_; }
  std::span<const complex> values() const { return data_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  ComplexMatrix conj() const;
  complex trace() const;

  /// Induced 1-norm (max column sum of magnitudes).
  double norm1() const;
  double max_abs() const;
  /// max |A - A^dagger| over entries.
  double hermiticity_error() const;

  ComplexMatrix& operator+=(const ComplexMatrix& rhs);
  ComplexMatrix& operator-=(const ComplexMatrix& rhs);
  ComplexMatrix& operator*=(complex s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<complex> data_;
};

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(complex s, ComplexMatrix m);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector operator*(const ComplexMatrix& a, const ComplexVector& x);

/// Largest entrywise magnitude of a - b. Shapes must agree.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// Kronecker product, entry [(i*rb + k), (j*cb + l)] = a[i,j] * b[k,l].
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Matrix exponential by scaling and squaring. The scaled matrix satisfies
/// ||A / 2^s||_1 <= 0.5 before a Taylor series summed to double precision.
ComplexMatrix expm(const ComplexMatrix& a);

/// Roots of lambda^2 - tr(H) lambda + det(H) = 0 for a 2x2 matrix. The root with
/// the larger imaginary part comes first; equal imaginary parts are ordered by
/// descending real part.
std::pair<complex, complex> eig2x2(const ComplexMatrix& h);

/// Solves A x = b by LU with partial pivoting. Throws SingularMatrixError.
ComplexVector solve_linear(const ComplexMatrix& a, const ComplexVector& b);

/// Number of pivots below rel_tol * (largest pivot) in an LU factorization with
/// complete pivoting. Used as a kernel-dimension estimate.
std::size_t numerical_nullity(const ComplexMatrix& a, double rel_tol = 1e-10);

/// Eigen-decomposition of a Hermitian matrix (cyclic Jacobi).
struct HermitianEigen {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // column k is the eigenvector of values[k]
};

HermitianEigen eigh(const ComplexMatrix& h);

}  // namespace ptdimer
