#include "ptdimer/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ptdimer {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

// ---------------------------------------------------------------- vectors

double ComplexVector::norm() const {
  double acc = 0.0;
  for (const auto& z : data_) acc += std::norm(z);
  return std::sqrt(acc);
}

complex ComplexVector::dot(const ComplexVector& other) const {
  if (other.size() != size()) throw std::invalid_argument("dot: dimension mismatch");
  complex acc{};
  for (std::size_t i = 0; i < size(); ++i) acc += std::conj(data_[i]) * other.data_[i];
  return acc;
}

ComplexVector& ComplexVector::operator+=(const ComplexVector& rhs) {
  if (rhs.size() != size()) throw std::invalid_argument("vector +: dimension mismatch");
  for (std::size_t i = 0; i < size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

ComplexVector& ComplexVector::operator-=(const ComplexVector& rhs) {
  if (rhs.size() != size()) throw std::invalid_argument("vector -: dimension mismatch");
  for (std::size_t i = 0; i < size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

ComplexVector& ComplexVector::operator*=(complex s) {
  for (auto& z : data_) z *= s;
  return *this;
}

ComplexVector operator+(ComplexVector lhs, const ComplexVector& rhs) { return lhs += rhs; }
ComplexVector operator-(ComplexVector lhs, const ComplexVector& rhs) { return lhs -= rhs; }
ComplexVector operator*(complex s, ComplexVector v) { return v *= s; }

// ---------------------------------------------------------------- matrices

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<complex>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw std::invalid_argument("ComplexMatrix: ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const complex> diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

ComplexMatrix ComplexMatrix::conj() const {
  ComplexMatrix out(*this);
  for (auto& z : out.data_) z = std::conj(z);
  return out;
}

complex ComplexMatrix::trace() const {
  if (!is_square()) throw std::invalid_argument("trace: non-square matrix");
  complex acc{};
  for (std::size_t i = 0; i < rows_; ++i) acc += (*this)(i, i);
  return acc;
}

double ComplexMatrix::norm1() const {
  double best = 0.0;
  for (std::size_t c = 0; c < cols_; ++c) {
    double col = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) col += std::abs((*this)(r, c));
    best = std::max(best, col);
  }
  return best;
}

double ComplexMatrix::max_abs() const {
  double best = 0.0;
  for (const auto& z : data_) best = std::max(best, std::abs(z));
  return best;
}

double ComplexMatrix::hermiticity_error() const {
  if (!is_square()) throw std::invalid_argument("hermiticity_error: non-square matrix");
  double worst = 0.0;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = r; c < cols_; ++c)
      worst = std::max(worst, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
  return worst;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
  require_same_shape(*this, rhs, "matrix +");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
  require_same_shape(*this, rhs, "matrix -");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(complex s) {
  for (auto& z : data_) z *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }
ComplexMatrix operator*(complex s, ComplexMatrix m) { return m *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix *: inner dimension mismatch");
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const complex aik = a(i, k);
      if (aik == complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

ComplexVector operator*(const ComplexMatrix& a, const ComplexVector& x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matrix-vector *: dimension mismatch");
  ComplexVector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    complex acc{};
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    out[i] = acc;
  }
  return out;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  return worst;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("kron: empty operand");
  const std::size_t rb = b.rows(), cb = b.cols();
  ComplexMatrix out(a.rows() * rb, a.cols() * cb);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const complex aij = a(i, j);
      if (aij == complex{}) continue;
      for (std::size_t k = 0; k < rb; ++k)
        for (std::size_t l = 0; l < cb; ++l) out(i * rb + k, j * cb + l) = aij * b(k, l);
    }
  return out;
}

// ---------------------------------------------------------------- expm

ComplexMatrix expm(const ComplexMatrix& a) {
  if (!a.is_square()) throw std::invalid_argument("expm: non-square matrix");
  const std::size_t n = a.rows();
  const double norm = a.norm1();
  if (!std::isfinite(norm)) throw std::invalid_argument("expm: non-finite entries");

  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  ComplexMatrix scaled = std::ldexp(1.0, -squarings) * a;

  ComplexMatrix result = ComplexMatrix::identity(n);
  ComplexMatrix term = ComplexMatrix::identity(n);
  for (int k = 1; k <= 40; ++k) {
    term = (1.0 / k) * (term * scaled);
    result += term;
    if (term.norm1() <= 1e-18 * result.norm1()) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

// ---------------------------------------------------------------- eig2x2

std::pair<complex, complex> eig2x2(const ComplexMatrix& h) {
  if (h.rows() != 2 || h.cols() != 2) throw std::invalid_argument("eig2x2: expected a 2x2 matrix");
  const complex half_tr = 0.5 * (h(0, 0) + h(1, 1));
  const complex det = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
  complex s = std::sqrt(half_tr * half_tr - det);
  // Pick the sign that adds constructively; the partner root comes from det/root.
  if (std::real(std::conj(half_tr) * s) < 0.0) s = -s;
  complex first = half_tr + s;
  complex second = first != complex{} ? det / first : half_tr - s;

  const double scale = std::max(std::abs(first), std::abs(second));
  const double tie = 1e-12 * scale;
  const double dim = first.imag() - second.imag();
  const bool swap = dim < -tie || (std::abs(dim) <= tie && first.real() < second.real());
  if (swap) std::swap(first, second);
  return {first, second};
}

// ---------------------------------------------------------------- solves

ComplexVector solve_linear(const ComplexMatrix& a, const ComplexVector& b) {
  if (!a.is_square()) throw std::invalid_argument("solve_linear: non-square matrix");
  if (a.rows() != b.size()) throw std::invalid_argument("solve_linear: dimension mismatch");
  const std::size_t n = a.rows();
  ComplexMatrix lu(a);
  ComplexVector x(b);
  const double scale = a.max_abs();
  if (scale == 0.0) throw SingularMatrixError("solve_linear: zero matrix");

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      const double v = std::abs(lu(r, k));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best <= 1e-14 * scale) throw SingularMatrixError("solve_linear: matrix is singular to working precision");
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(lu(k, c), lu(piv, c));
      std::swap(x[k], x[piv]);
    }
    const complex inv = 1.0 / lu(k, k);
    for (std::size_t r = k + 1; r < n; ++r) {
      const complex f = lu(r, k) * inv;
      if (f == complex{}) continue;
      lu(r, k) = f;
      for (std::size_t c = k + 1; c < n; ++c) lu(r, c) -= f * lu(k, c);
      x[r] -= f * x[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    complex acc = x[k];
    for (std::size_t c = k + 1; c < n; ++c) acc -= lu(k, c) * x[c];
    x[k] = acc / lu(k, k);
  }
  return x;
}

std::size_t numerical_nullity(const ComplexMatrix& a, double rel_tol) {
  if (!a.is_square()) throw std::invalid_argument("numerical_nullity: non-square matrix");
  const std::size_t n = a.rows();
  ComplexMatrix lu(a);
  std::vector<double> pivots;
  pivots.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    double best = -1.0;
    for (std::size_t r = k; r < n; ++r)
      for (std::size_t c = k; c < n; ++c) {
        const double v = std::norm(lu(r, c));
        if (v > best) {
          best = v;
          pr = r;
          pc = c;
        }
      }
    for (std::size_t c = 0; c < n; ++c) std::swap(lu(k, c), lu(pr, c));
    for (std::size_t r = 0; r < n; ++r) std::swap(lu(r, k), lu(r, pc));
    pivots.push_back(std::sqrt(best));
    if (best == 0.0) continue;
    for (std::size_t r = k + 1; r < n; ++r) {
      const complex f = lu(r, k) / lu(k, k);
      for (std::size_t c = k + 1; c < n; ++c) lu(r, c) -= f * lu(k, c);
    }
  }
  const double largest = pivots.empty() ? 0.0 : *std::max_element(pivots.begin(), pivots.end());
  return static_cast<std::size_t>(
      std::count_if(pivots.begin(), pivots.end(), [&](double p) { return p <= rel_tol * largest; }));
}

// ---------------------------------------------------------------- eigh

HermitianEigen eigh(const ComplexMatrix& h) {
  if (!h.is_square()) throw std::invalid_argument("eigh: non-square matrix");
  const std::size_t n = h.rows();
  ComplexMatrix a = 0.5 * (h + h.adjoint());
  ComplexMatrix v = ComplexMatrix::identity(n);

  auto off_norm = [&] {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        if (r != c) acc += std::norm(a(r, c));
    return std::sqrt(acc);
  };
  double total = 0.0;
  for (const auto& z : a.values()) total += std::norm(z);
  total = std::sqrt(total);

  for (int sweep = 0; sweep < 100 && off_norm() > 1e-15 * total; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= 1e-300) continue;
        const complex phase = apq / mag;
        const double alpha = a(p, p).real(), beta = a(q, q).real();
        const double tau = (beta - alpha) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // U restricted to (p, q): [[c, s], [-s conj(phase), c conj(phase)]]
        const complex upp = c, upq = s, uqp = -s * std::conj(phase), uqq = c * std::conj(phase);
        for (std::size_t r = 0; r < n; ++r) {
          const complex arp = a(r, p), arq = a(r, q);
          a(r, p) = arp * upp + arq * uqp;
          a(r, q) = arp * upq + arq * uqq;
          const complex vrp = v(r, p), vrq = v(r, q);
          v(r, p) = vrp * upp + vrq * uqp;
          v(r, q) = vrp * upq + vrq * uqq;
        }
        for (std::size_t col = 0; col < n; ++col) {
          const complex apc = a(p, col), aqc = a(q, col);
          a(p, col) = std::conj(upp) * apc + std::conj(uqp) * aqc;
          a(q, col) = std::conj(upq) * apc + std::conj(uqq) * aqc;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  HermitianEigen out;
  out.values.reserve(n);
  out.vectors = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values.push_back(a(order[k], order[k]).real());
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

}  // namespace ptdimer
